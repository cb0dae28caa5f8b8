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

#pragma once

// Experiment configuration and the repeated-split pipeline behind the
// command-line tool: data preparation, optional noise, evaluation and report
// files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lcm/data.hpp"
#include "lcm/eval.hpp"
#include "lcm/targets.hpp"
#include "lcm/train.hpp"

namespace lcm::exp {

struct GeneratorConfig {
  std::size_t classes = 4;
  std::size_t words_per_class = 50;
  double overlap = 0.5;
  std::size_t samples_per_class = 500;
  std::size_t doc_length = 30;
  /// Defaults to a seed derived from the experiment seed.
  std::optional<std::uint64_t> seed;
};

struct DatasetConfig {
  /// JSON-lines corpus; exactly one of path / generator.
  std::optional<std::filesystem::path> path;
  std::optional<GeneratorConfig> generator;
  /// Label groups; generated corpora group each confusable pair by default.
  std::optional<std::filesystem::path> groups;
  std::optional<std::filesystem::path> embeddings;
  std::size_t min_freq = 1;
  std::size_t max_vocab = 50000;
};

struct StrategySpec {
  std::string name;
  targets::TargetStrategy strategy;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  double noise_rate = 0.0;
  std::vector<StrategySpec> strategies;
  /// The seed field is ignored; run seeds come from `seed`.
  train::TrainConfig train;
  std::size_t n_splits = 10;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  std::filesystem::path out = "runs";
  std::size_t jobs = 1;

  void validate() const;
};

/// Strategies one-hot, ls(0.1) and lcm(4).
std::vector<StrategySpec> default_strategies();
StrategySpec make_strategy(targets::TargetStrategy strategy);

/// Strict parse: unknown keys anywhere are rejected. Relative paths are
/// resolved against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

data::ConfusionSpec confusion_spec(const GeneratorConfig& gen, std::uint64_t experiment_seed);

/// Every seed a run uses, resolved from the experiment seed.
struct ResolvedSeeds {
  std::optional<std::uint64_t> generator;
  std::uint64_t noise = 0;
  std::uint64_t embeddings = 0;
  std::vector<std::uint64_t> splits;
  std::vector<std::uint64_t> train;
};
ResolvedSeeds resolve_seeds(const ExperimentConfig& config);

struct PreparedData {
  data::Dataset dataset;
  data::Vocab vocab;
  std::optional<data::GroupMap> groups;
  data::NoiseReport noise;
  std::optional<ad::Tensor> embeddings;
  /// {role: {"path": ..., "sha256": ...}} for every input file read.
  nlohmann::json inputs = nlohmann::json::object();
};

/// Loads or generates the corpus, then injects noise when requested.
PreparedData prepare_data(const ExperimentConfig& config);

struct ExperimentResult {
  eval::EvalResult eval;
  nlohmann::json manifest;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const PreparedData& data);

/// Writes histories, label similarity matrices, per_split.csv, manifest.json
/// and finally summary.csv into config.out.
void write_reports(const ExperimentConfig& config, const PreparedData& data, const ExperimentResult& result);

/// Directory-safe form of a strategy name.
std::string slug(const std::string& name);

nlohmann::json vocab_to_json(const data::Vocab& vocab);
data::Vocab vocab_from_json(const nlohmann::json& doc);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);
/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lcm::exp
