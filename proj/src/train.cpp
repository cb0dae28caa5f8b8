// Copyright (c) 2026 The lcmlab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lcm/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lcm/encoders.hpp"
#include "lcm/error.hpp"
#include "lcm/rng.hpp"

namespace lcm::train {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("train: learning_rate must be positive");
  if (batch_size < 1) throw ValidationError("train: batch_size must be at least 1");
  if (epochs < 1) throw ValidationError("train: epochs must be at least 1");
  if (dim < 1) throw ValidationError("train: dim must be at least 1");
  if (max_len < 1) throw ValidationError("train: max_len must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ValidationError("train: Adam betas must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ValidationError("train: Adam epsilon must be positive");
  targets::validate(strategy);
}

void adam_step(ad::TensorMap& params, const ad::GradientMap& grads, AdamState& state, const AdamConfig& config) {
  for (const auto& [name, g] : grads) {
    if (!params.contains(name)) throw ValidationError("adam_step: gradient for unknown parameter '" + name + "'");
  }
  for (const auto& [name, p] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) throw ValidationError("adam_step: no gradient for parameter '" + name + "'");
    if (it->second.shape() != p.shape())
      throw ShapeError("adam_step: gradient for '" + name + "' has shape " + it->second.shape_string() +
                       ", parameter has " + p.shape_string());
    if (!it->second.all_finite()) throw Error("adam_step: non-finite gradient for parameter '" + name + "'");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (auto& [name, p] : params) {
    const ad::Tensor& g = grads.at(name);
    auto& m = state.first_moment.try_emplace(name, p.shape()).first->second;
    auto& v = state.second_moment.try_emplace(name, p.shape()).first->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

TrainState initial_state(const data::Dataset& train, const TrainConfig& config) {
  ModelShape shape;
  shape.vocab_size = train.vocab_size;
  shape.feature_dim = train.feature_dim();
  shape.dim = config.dim;
  shape.classes = train.num_classes();
  TrainState s;
  s.model = init_model(shape, targets::uses_lcm(config.strategy), derive_seed(config.seed, "init"));
  return s;
}

EpochRecord train_epoch(TrainState& state, const data::Dataset& train, const TrainConfig& config, int epoch) {
  if (train.size() == 0) throw ValidationError("train_epoch: empty training set");
  const std::size_t c = train.num_classes();
  const bool lcm_on = targets::lcm_active(config.strategy, epoch);
  if (lcm_on && !state.model.lcm) throw ValidationError("train_epoch: LCM targets need LCM parameters");

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(std::span<std::size_t>(order));

  double loss_total = 0.0;
  std::size_t correct = 0;
  std::vector<const data::Example*> batch;
  std::vector<std::int32_t> labels;
  ad::TensorMap params = state.model.to_tensors();
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    batch.clear();
    labels.clear();
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(&train.examples[order[i]]);
      labels.push_back(batch.back()->label);
    }

    ad::Tape tape;
    const Model& model = state.model;
    auto pv = enc::bind(tape, model.predictor, true);
    std::optional<enc::LcmVars> lv;
    if (model.lcm) lv = enc::bind(tape, *model.lcm, true);
    ad::Var reps = enc::encode_text_batch(pv, batch);
    ad::Var pld = ad::softmax(enc::classifier_logits(pv, reps));

    std::optional<targets::LcmBatchInputs> lcm_in;
    if (lcm_on) {
      lcm_in = targets::LcmBatchInputs{reps, enc::encode_labels_batch(*lv), lv->head_weight, lv->head_bias};
    }
    ad::Var target = targets::target_batch(tape, config.strategy, labels, c, epoch, lcm_in);
    ad::Var loss = ad::kl_div(target, pld);

    const double loss_value = tape.value(loss).item();
    if (!std::isfinite(loss_value))
      throw Error("train_epoch: non-finite loss at epoch " + std::to_string(epoch));
    loss_total += loss_value * static_cast<double>(batch.size());
    const ad::Tensor& probs = tape.value(pld);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      auto row = probs.row(r);
      if (std::max_element(row.begin(), row.end()) - row.begin() == labels[r]) ++correct;
    }

    adam_step(params, tape.backprop(loss), state.adam, config.adam());
    state.model = Model::from_tensors(params);
  }

  EpochRecord rec;
  rec.epoch = epoch;
  rec.train_loss = loss_total / static_cast<double>(train.size());
  rec.train_acc = static_cast<double>(correct) / static_cast<double>(train.size());
  rec.lcm_active = lcm_on;
  return rec;
}

namespace {

void check_labels(const data::Dataset& ds, std::size_t c, const char* which) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto label = ds.examples[i].label;
    if (label < 0 || static_cast<std::size_t>(label) >= c)
      throw ValidationError(std::string("train_run: ") + which + " example " + std::to_string(i) + " has label " +
                            std::to_string(label) + " outside [0, " + std::to_string(c) + ")");
  }
}

}  // namespace

TrainResult train_run(const data::Dataset& train, const data::Dataset& test, const TrainConfig& config,
                      std::optional<TrainState> start, const EpochCallback& on_epoch) {
  config.validate();
  const std::size_t c = train.num_classes();
  if (c < 2) throw ValidationError("train_run: need at least 2 classes");
  if (test.num_classes() != c) throw ValidationError("train_run: train and test class counts differ");
  check_labels(train, c, "train");
  check_labels(test, c, "test");

  TrainResult result{start ? std::move(*start) : initial_state(train, config), {}};
  if (result.state.model.num_classes() != c)
    throw ValidationError("train_run: model class count does not match the data");
  for (int epoch = result.state.next_epoch; epoch < config.epochs; ++epoch) {
    EpochRecord rec = train_epoch(result.state, train, config, epoch);
    if (test.size() > 0) {
      auto pred = enc::predict(result.state.model.predictor, test);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == test.examples[i].label ? 1 : 0;
      rec.test_acc = static_cast<double>(hits) / static_cast<double>(test.size());
    } else {
      rec.test_acc = std::nan("");
    }
    result.state.next_epoch = epoch + 1;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(result.state, rec);
  }
  return result;
}

std::string history_csv(const TrainHistory& history) {
  std::string out = "epoch,train_loss,train_acc,test_acc,lcm_active\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d\n", r.epoch, r.train_loss, r.train_acc, r.test_acc,
                  r.lcm_active ? 1 : 0);
    out += buf;
  }
  return out;
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << history_csv(history);
}

void save_train_state(const std::filesystem::path& path, const TrainState& state) {
  nlohmann::json doc;
  doc["params"] = checkpoint_to_json(state.model.to_tensors());
  doc["adam"] = {{"step", state.adam.step},
                 {"first_moment", checkpoint_to_json(state.adam.first_moment)},
                 {"second_moment", checkpoint_to_json(state.adam.second_moment)}};
  doc["next_epoch"] = state.next_epoch;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << doc.dump() << '\n';
}

TrainState load_train_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    nlohmann::json doc;
    in >> doc;
    TrainState s;
    s.model = Model::from_tensors(checkpoint_from_json(doc.at("params")));
    s.adam.step = doc.at("adam").at("step").get<std::int64_t>();
    s.adam.first_moment = checkpoint_from_json(doc.at("adam").at("first_moment"));
    s.adam.second_moment = checkpoint_from_json(doc.at("adam").at("second_moment"));
    s.next_epoch = doc.at("next_epoch").get<int>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace lcm::train
