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

// lcmlab: command-line driver for data generation, noise injection,
// training, repeated-split evaluation and label-similarity export.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lcm/data.hpp"
#include "lcm/encoders.hpp"
#include "lcm/error.hpp"
#include "lcm/eval.hpp"
#include "lcm/experiment.hpp"
#include "lcm/model.hpp"
#include "lcm/rng.hpp"
#include "lcm/train.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lcm;

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::vector<std::string> strategies;
  std::optional<double> noise_rate;
  std::optional<std::size_t> splits;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  std::optional<int> epochs;
  std::optional<std::string> data;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "Experiment seed");
    app->add_option("--alpha", alpha, "Alpha of every lcm strategy");
    app->add_option("--epsilon", epsilon, "Epsilon of every ls strategy");
    app->add_option("--strategy", strategies, "Replace the strategy list, e.g. one-hot, ls(0.1), lcm(4,stop=10)");
    app->add_option("--noise-rate", noise_rate, "Within-group label noise rate");
    app->add_option("--splits", splits, "Number of repeated splits");
    app->add_option("--out", out, "Output directory");
    app->add_option("--jobs", jobs, "Worker threads");
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--data", data, "JSON-lines corpus (replaces the dataset source)");
  }

  void apply(exp::ExperimentConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (!strategies.empty()) {
      cfg.strategies.clear();
      for (const auto& s : strategies) cfg.strategies.push_back(exp::make_strategy(targets::parse_strategy(s)));
    }
    for (auto& s : cfg.strategies) {
      const bool default_name = s.name == targets::describe(s.strategy);
      if (auto* lcm = std::get_if<targets::Lcm>(&s.strategy); lcm && alpha) lcm->alpha = *alpha;
      if (auto* ls = std::get_if<targets::LabelSmoothing>(&s.strategy); ls && epsilon) ls->epsilon = *epsilon;
      if (default_name) s.name = targets::describe(s.strategy);
    }
    if (noise_rate) cfg.noise_rate = *noise_rate;
    if (splits) cfg.n_splits = *splits;
    if (out) cfg.out = *out;
    if (jobs) cfg.jobs = *jobs;
    if (epochs) cfg.train.epochs = *epochs;
    if (data) {
      cfg.dataset.path = fs::path(*data);
      cfg.dataset.generator.reset();
    }
  }
};

exp::ExperimentConfig load_with_overrides(const std::optional<std::string>& config_path, const Overrides& o) {
  exp::ExperimentConfig cfg =
      config_path ? exp::load_config(*config_path) : exp::config_from_json(json::object());
  o.apply(cfg);
  cfg.validate();
  return cfg;
}

std::map<std::string, std::size_t> label_counts(const data::Dataset& ds) {
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : ds.examples) ++counts[ds.label_names.at(static_cast<std::size_t>(ex.label))];
  return counts;
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const std::optional<std::string>& config_path, exp::GeneratorConfig flags,
                 const std::map<std::string, bool>& given, std::optional<std::uint64_t> seed, const std::string& out) {
  exp::GeneratorConfig gen;
  std::uint64_t experiment_seed = 0;
  if (config_path) {
    const auto cfg = exp::load_config(*config_path);
    if (!cfg.dataset.generator) throw ValidationError("gen-data: config has no dataset.generator section");
    gen = *cfg.dataset.generator;
    experiment_seed = cfg.seed;
  }
  if (given.at("classes")) gen.classes = flags.classes;
  if (given.at("words")) gen.words_per_class = flags.words_per_class;
  if (given.at("overlap")) gen.overlap = flags.overlap;
  if (given.at("samples")) gen.samples_per_class = flags.samples_per_class;
  if (given.at("length")) gen.doc_length = flags.doc_length;
  if (seed) gen.seed = *seed;

  const auto spec = exp::confusion_spec(gen, experiment_seed);
  const auto ds = data::generate_confused_corpus(spec);
  const auto vocab = data::generator_vocab(spec);
  const fs::path dir(out);
  fs::create_directories(dir);
  data::write_jsonl(dir / "corpus.jsonl", data::to_records(ds, vocab));
  data::write_group_map(dir / "groups.json", data::generator_groups(spec));
  json manifest = {
      {"generator",
       {{"classes", gen.classes},
        {"words_per_class", gen.words_per_class},
        {"overlap", gen.overlap},
        {"samples_per_class", gen.samples_per_class},
        {"doc_length", gen.doc_length},
        {"seed", spec.seed}}},
      {"examples", ds.size()},
      {"label_counts", label_counts(ds)},
      {"pair_bayes_accuracy", data::pair_bayes_accuracy(spec, 0, 1)},
      {"outputs",
       {{"corpus.jsonl", eval::file_sha256(dir / "corpus.jsonl")},
        {"groups.json", eval::file_sha256(dir / "groups.json")}}},
  };
  exp::write_json(dir / "manifest.json", manifest);
  std::cout << "wrote " << ds.size() << " documents to " << (dir / "corpus.jsonl").string() << "\n";
  return 0;
}

// ------------------------------------------------------------ inject-noise

int cmd_inject_noise(const std::string& data_path, const std::string& groups_path, double rate,
                     std::uint64_t seed, const std::string& out) {
  auto records = data::read_jsonl(data_path);
  const auto groups = data::read_group_map(groups_path);
  // Noise only touches labels, so the records keep their original text.
  data::Dataset labels_only;
  labels_only.label_names = data::label_names_of(records);
  for (const auto& r : records) {
    data::Example ex;
    const auto it = std::find(labels_only.label_names.begin(), labels_only.label_names.end(), r.label);
    ex.label = static_cast<std::int32_t>(it - labels_only.label_names.begin());
    labels_only.examples.push_back(std::move(ex));
  }
  const std::uint64_t noise_seed = derive_seed(seed, "noise");
  data::NoiseReport report;
  const auto noisy = data::inject_label_noise(labels_only, groups, rate, noise_seed, &report);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& ex = noisy.examples[i];
    const auto& name = noisy.label_names.at(static_cast<std::size_t>(ex.label));
    if (name != records[i].label) {
      if (!records[i].original_label) records[i].original_label = records[i].label;
      records[i].label = name;
    }
  }
  const fs::path dir(out);
  fs::create_directories(dir);
  data::write_jsonl(dir / "corpus.jsonl", records);
  json manifest = {
      {"inputs",
       {{"dataset", {{"path", data_path}, {"sha256", eval::file_sha256(data_path)}}},
        {"groups", {{"path", groups_path}, {"sha256", eval::file_sha256(groups_path)}}}}},
      {"rate", rate},
      {"seed", seed},
      {"noise_seed", noise_seed},
      {"eligible", report.eligible},
      {"flipped", report.flipped},
      {"outputs", {{"corpus.jsonl", eval::file_sha256(dir / "corpus.jsonl")}}},
  };
  exp::write_json(dir / "manifest.json", manifest);
  std::cout << "flipped " << report.flipped << " of " << report.eligible << " eligible labels\n";
  return 0;
}

// ------------------------------------------------------------------- train

int cmd_train(const exp::ExperimentConfig& cfg, std::size_t split_index, std::size_t strategy_index) {
  if (strategy_index >= cfg.strategies.size())
    throw ValidationError("train: strategy index " + std::to_string(strategy_index) + " out of range");
  const auto prepared = exp::prepare_data(cfg);
  const auto [train_set, test_set] =
      data::split_dataset(prepared.dataset, cfg.train_fraction, eval::split_seed(cfg.seed, split_index));
  train::TrainConfig tc = cfg.train;
  tc.strategy = cfg.strategies[strategy_index].strategy;
  tc.seed = eval::train_seed(cfg.seed, split_index);
  auto start = train::initial_state(train_set, tc);
  if (prepared.embeddings) start.model.predictor.text.embedding = *prepared.embeddings;
  const auto result = train::train_run(train_set, test_set, tc, start, [](const auto&, const auto& rec) {
    std::printf("epoch %3d  loss %.5f  train %.4f  test %.4f%s\n", rec.epoch, rec.train_loss, rec.train_acc,
                rec.test_acc, rec.lcm_active ? "  [lcm]" : "");
  });

  const fs::path& dir = cfg.out;
  fs::create_directories(dir);
  save_checkpoint(dir / "model.json", result.state.model.to_tensors());
  save_checkpoint(dir / "predictor.json", predictor_tensors(result.state.model.predictor));
  train::save_train_state(dir / "train_state.json", result.state);
  train::write_history_csv(dir / "history.csv", result.history);
  exp::write_json(dir / "labels.json", prepared.dataset.label_names);
  exp::write_json(dir / "vocab.json", exp::vocab_to_json(prepared.vocab));
  exp::write_json(dir / "manifest.json",
                  {{"config", exp::config_to_json(cfg)},
                   {"strategy", cfg.strategies[strategy_index].name},
                   {"split_index", split_index},
                   {"split_seed", eval::split_seed(cfg.seed, split_index)},
                   {"train_seed", tc.seed},
                   {"inputs", prepared.inputs},
                   {"noise", {{"eligible", prepared.noise.eligible}, {"flipped", prepared.noise.flipped}}},
                   {"test_accuracy", result.history.back().test_acc}});
  return 0;
}

// ------------------------------------------------------------- eval-splits

int cmd_eval_splits(const exp::ExperimentConfig& cfg) {
  const auto prepared = exp::prepare_data(cfg);
  const auto result = exp::run_experiment(cfg, prepared);
  exp::write_reports(cfg, prepared, result);
  for (const auto& r : result.eval.reports) {
    std::printf("%-24s mean %.4f  std %.4f", r.strategy.c_str(), r.mean, r.std);
    if (r.vs_baseline) {
      if (r.vs_baseline->test.identical) {
        std::printf("  p identical");
      } else {
        std::printf("  p %.4g", r.vs_baseline->test.p_value);
      }
    }
    std::printf("\n");
  }
  std::cout << "reports in " << cfg.out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------- export-labelsim

std::vector<std::string> read_labels(const std::string& path) {
  const json doc = exp::read_json(path);
  if (!doc.is_array()) throw FormatError(path + ": expected an array of label names");
  return doc.get<std::vector<std::string>>();
}

int cmd_export_labelsim(const std::string& model_path, const std::string& labels_path,
                        const std::optional<std::string>& groups_path, const std::string& out) {
  const Model model = Model::from_tensors(load_checkpoint(model_path));
  if (!model.lcm) throw ValidationError(model_path + " has no label encoder parameters");
  const auto names = read_labels(labels_path);
  const auto reps = enc::encode_labels(names.size(), model.lcm->label);
  const auto sim = eval::label_similarity_matrix(reps, names);
  exp::write_text(out, eval::similarity_csv(sim));
  if (groups_path) {
    const auto gc = eval::group_contrast(sim, data::read_group_map(*groups_path));
    std::printf("within-group %.4f  between-group %.4f\n", gc.within, gc.between);
  }
  return 0;
}

// ----------------------------------------------------------------- predict

int cmd_predict(const std::string& model_path, const std::string& vocab_path, const std::string& labels_path,
                const std::string& data_path, std::size_t max_len, const std::string& out) {
  const Predictor predictor = predictor_from_tensors(load_checkpoint(model_path));
  const auto names = read_labels(labels_path);
  auto records = data::read_jsonl(data_path);
  const bool labelled = std::all_of(records.begin(), records.end(), [&](const data::RawRecord& r) {
    return std::find(names.begin(), names.end(), r.label) != names.end();
  });
  if (!labelled)
    for (auto& r : records) r.label = names.front();
  const data::Vocab vocab = records.empty() || records.front().is_vector
                                ? data::Vocab{}
                                : exp::vocab_from_json(exp::read_json(vocab_path));
  const auto ds = data::encode_corpus(records, vocab, names, max_len);
  const auto pred = enc::predict(predictor, ds);
  std::string csv = "index,predicted\n";
  for (std::size_t i = 0; i < pred.size(); ++i)
    csv += std::to_string(i) + "," + names.at(static_cast<std::size_t>(pred[i])) + "\n";
  exp::write_text(out, csv);
  if (labelled) {
    const auto labels = ds.labels();
    std::printf("accuracy %.4f on %zu examples\n", eval::accuracy(pred, labels), pred.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label confusion training lab"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a confused synthetic corpus");
  std::optional<std::string> gen_config;
  exp::GeneratorConfig gen_flags;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out;
  gen->add_option("--config", gen_config, "Experiment config with a dataset.generator section");
  auto* o_classes = gen->add_option("--classes", gen_flags.classes);
  auto* o_words = gen->add_option("--words-per-class", gen_flags.words_per_class);
  auto* o_overlap = gen->add_option("--overlap", gen_flags.overlap);
  auto* o_samples = gen->add_option("--samples-per-class", gen_flags.samples_per_class);
  auto* o_length = gen->add_option("--doc-length", gen_flags.doc_length);
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // inject-noise
  auto* noise = app.add_subcommand("inject-noise", "Flip labels within label groups");
  std::string noise_data, noise_groups, noise_out;
  double noise_rate = 0.0;
  std::uint64_t noise_seed = 0;
  noise->add_option("--data", noise_data, "JSON-lines corpus")->required();
  noise->add_option("--groups", noise_groups, "Label group map (JSON)")->required();
  noise->add_option("--rate", noise_rate, "Fraction of eligible examples to relabel")->required();
  noise->add_option("--seed", noise_seed, "Noise seed");
  noise->add_option("--out", noise_out, "Output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one strategy on one split and save checkpoints");
  std::optional<std::string> train_config;
  Overrides train_over;
  std::size_t train_split = 0, train_strategy = 0;
  train_cmd->add_option("--config", train_config, "Experiment config (JSON)");
  train_cmd->add_option("--split-index", train_split, "Which repeated split to train on");
  train_cmd->add_option("--strategy-index", train_strategy, "Which configured strategy to train");
  train_over.attach(train_cmd);

  // eval-splits / run
  auto* run = app.add_subcommand("eval-splits", "Repeated-split evaluation of every strategy");
  run->alias("run");
  std::optional<std::string> run_config;
  Overrides run_over;
  run->add_option("--config", run_config, "Experiment config (JSON)");
  run_over.attach(run);

  // export-labelsim
  auto* sim = app.add_subcommand("export-labelsim", "Cosine similarity of learned label representations");
  std::string sim_model, sim_labels, sim_out;
  std::optional<std::string> sim_groups;
  sim->add_option("--model", sim_model, "Full checkpoint (model.json)")->required();
  sim->add_option("--labels", sim_labels, "Label names (labels.json)")->required();
  sim->add_option("--groups", sim_groups, "Label group map; prints within/between means");
  sim->add_option("--out", sim_out, "CSV output path")->required();

  // predict
  auto* pred = app.add_subcommand("predict", "Predict with encoder and classifier parameters only");
  std::string pred_model, pred_vocab, pred_labels, pred_data, pred_out;
  std::size_t pred_max_len = 256;
  pred->add_option("--model", pred_model, "Checkpoint (predictor.json suffices)")->required();
  pred->add_option("--vocab", pred_vocab, "Vocabulary (vocab.json)");
  pred->add_option("--labels", pred_labels, "Label names (labels.json)")->required();
  pred->add_option("--data", pred_data, "JSON-lines corpus")->required();
  pred->add_option("--max-len", pred_max_len, "Token limit per document");
  pred->add_option("--out", pred_out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      const std::map<std::string, bool> given = {{"classes", o_classes->count() > 0},
                                                 {"words", o_words->count() > 0},
                                                 {"overlap", o_overlap->count() > 0},
                                                 {"samples", o_samples->count() > 0},
                                                 {"length", o_length->count() > 0}};
      return cmd_gen_data(gen_config, gen_flags, given, gen_seed, gen_out);
    }
    if (*noise) return cmd_inject_noise(noise_data, noise_groups, noise_rate, noise_seed, noise_out);
    if (*train_cmd) return cmd_train(load_with_overrides(train_config, train_over), train_split, train_strategy);
    if (*run) return cmd_eval_splits(load_with_overrides(run_config, run_over));
    if (*sim) return cmd_export_labelsim(sim_model, sim_labels, sim_groups, sim_out);
    if (*pred) return cmd_predict(pred_model, pred_vocab, pred_labels, pred_data, pred_max_len, pred_out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
