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

#include "lcm/model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lcm/error.hpp"
#include "lcm/init.hpp"
#include "lcm/rng.hpp"

namespace lcm {
namespace {

const ad::Tensor& need(const ad::TensorMap& t, const char* name) {
  auto it = t.find(name);
  if (it == t.end()) throw FormatError(std::string("checkpoint is missing '") + name + "'");
  return it->second;
}

}  // namespace

ad::TensorMap predictor_tensors(const Predictor& p) {
  ad::TensorMap out;
  if (p.text.embedding) out.emplace(param::kTextEmbedding, *p.text.embedding);
  out.emplace(param::kTextHiddenWeight, p.text.hidden_weight);
  out.emplace(param::kTextHiddenBias, p.text.hidden_bias);
  out.emplace(param::kClassifierWeight, p.classifier.weight);
  out.emplace(param::kClassifierBias, p.classifier.bias);
  return out;
}

Predictor predictor_from_tensors(const ad::TensorMap& t) {
  Predictor p;
  if (auto it = t.find(param::kTextEmbedding); it != t.end()) p.text.embedding = it->second;
  p.text.hidden_weight = need(t, param::kTextHiddenWeight);
  p.text.hidden_bias = need(t, param::kTextHiddenBias);
  p.classifier.weight = need(t, param::kClassifierWeight);
  p.classifier.bias = need(t, param::kClassifierBias);

  const auto& hw = p.text.hidden_weight;
  const auto& cw = p.classifier.weight;
  if (hw.rank() != 2 || p.text.hidden_bias.rank() != 1 || hw.cols() != p.text.hidden_bias.size())
    throw FormatError("checkpoint: text hidden layer shapes do not conform");
  if (p.text.embedding && (p.text.embedding->rank() != 2 || p.text.embedding->cols() != hw.rows()))
    throw FormatError("checkpoint: text embedding width does not match the hidden layer");
  if (cw.rank() != 2 || cw.rows() != hw.cols() || p.classifier.bias.rank() != 1 ||
      p.classifier.bias.size() != cw.cols())
    throw FormatError("checkpoint: classifier shapes do not conform");
  return p;
}

ad::TensorMap Model::to_tensors() const {
  ad::TensorMap out = predictor_tensors(predictor);
  if (lcm) {
    out.emplace(param::kLabelEmbedding, lcm->label.embedding);
    out.emplace(param::kLabelHiddenWeight, lcm->label.hidden_weight);
    out.emplace(param::kLabelHiddenBias, lcm->label.hidden_bias);
    out.emplace(param::kLcmWeight, lcm->head.weight);
    out.emplace(param::kLcmBias, lcm->head.bias);
  }
  return out;
}

Model Model::from_tensors(const ad::TensorMap& t) {
  Model m;
  m.predictor = predictor_from_tensors(t);
  const char* lcm_names[] = {param::kLabelEmbedding, param::kLabelHiddenWeight, param::kLabelHiddenBias,
                             param::kLcmWeight, param::kLcmBias};
  std::size_t present = 0;
  for (const char* n : lcm_names) present += t.contains(n) ? 1 : 0;
  if (present == 0) return m;
  if (present != std::size(lcm_names)) throw FormatError("checkpoint: incomplete LCM parameter set");
  LcmParams l;
  l.label.embedding = need(t, param::kLabelEmbedding);
  l.label.hidden_weight = need(t, param::kLabelHiddenWeight);
  l.label.hidden_bias = need(t, param::kLabelHiddenBias);
  l.head.weight = need(t, param::kLcmWeight);
  l.head.bias = need(t, param::kLcmBias);
  const std::size_t c = m.num_classes();
  const std::size_t d = m.predictor.text.dim();
  if (l.label.embedding.rank() != 2 || l.label.embedding.rows() != c || l.label.embedding.cols() != d ||
      l.label.hidden_weight.shape() != ad::Shape{d, d} || l.label.hidden_bias.shape() != ad::Shape{d} ||
      l.head.weight.shape() != ad::Shape{c, c} || l.head.bias.shape() != ad::Shape{c})
    throw FormatError("checkpoint: LCM parameter shapes do not match the predictor");
  m.lcm = std::move(l);
  return m;
}

Model init_model(const ModelShape& shape, bool with_lcm, std::uint64_t seed) {
  if (shape.dim == 0) throw ValidationError("init_model: dim must be positive");
  if (shape.classes < 2) throw ValidationError("init_model: need at least 2 classes");
  const bool vector_path = shape.feature_dim > 0;
  if (!vector_path && shape.vocab_size < 3)
    throw ValidationError("init_model: vocabulary has no tokens beyond the reserved ids");
  const std::size_t d = shape.dim;
  const std::size_t c = shape.classes;

  Model m;
  Rng rng(derive_seed(seed, "init.predictor"));
  if (!vector_path) m.predictor.text.embedding = init_embedding(shape.vocab_size, d, rng);
  m.predictor.text.hidden_weight = init_dense(vector_path ? shape.feature_dim : d, d, rng);
  m.predictor.text.hidden_bias = ad::Tensor(ad::Shape{d});
  m.predictor.classifier.weight = init_dense(d, c, rng);
  m.predictor.classifier.bias = ad::Tensor(ad::Shape{c});
  if (with_lcm) {
    Rng lrng(derive_seed(seed, "init.lcm"));
    LcmParams l;
    l.label.embedding = init_embedding(c, d, lrng);
    l.label.hidden_weight = init_dense(d, d, lrng);
    l.label.hidden_bias = ad::Tensor(ad::Shape{d});
    l.head.weight = init_dense(c, c, lrng);
    l.head.bias = ad::Tensor(ad::Shape{c});
    m.lcm = std::move(l);
  }
  return m;
}

nlohmann::json checkpoint_to_json(const ad::TensorMap& tensors) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [name, t] : tensors) {
    if (!t.all_finite()) throw ValidationError("checkpoint: tensor '" + name + "' has non-finite values");
    doc[name] = {{"shape", t.shape()}, {"data", t.values()}};
  }
  return doc;
}

ad::TensorMap checkpoint_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw FormatError("checkpoint: expected a JSON object");
  ad::TensorMap out;
  for (const auto& [name, entry] : doc.items()) {
    try {
      auto shape = entry.at("shape").get<ad::Shape>();
      auto data = entry.at("data").get<std::vector<double>>();
      out.emplace(name, ad::Tensor(std::move(shape), std::move(data)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("checkpoint entry '" + name + "': " + e.what());
    } catch (const ShapeError& e) {
      throw FormatError("checkpoint entry '" + name + "': " + e.what());
    }
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ad::TensorMap& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << checkpoint_to_json(tensors).dump() << '\n';
}

ad::TensorMap load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace lcm
