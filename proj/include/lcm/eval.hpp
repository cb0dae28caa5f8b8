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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcm/autodiff.hpp"
#include "lcm/data.hpp"
#include "lcm/train.hpp"

namespace lcm::eval {

/// Fraction of exact matches. Lengths must agree and be nonzero.
double accuracy(std::span<const std::int32_t> predictions, std::span<const std::int32_t> labels);

double sample_mean(std::span<const double> xs);
/// n - 1 denominator; needs at least two values.
double sample_std(std::span<const double> xs);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `df` degrees
/// of freedom (df may be fractional).
double student_t_two_sided(double t, double df);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  /// Both samples have zero variance and equal means; t and df are
  /// undefined and p_value is reported as 1.
  bool identical = false;
};

/// Unequal-variance two-sample t-test. Zero variance on both sides gives
/// `identical` for equal means and p = 0 otherwise.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

struct Comparison {
  std::string baseline;
  WelchResult test;
};

struct SplitReport {
  std::string strategy;
  std::vector<double> accuracies;
  std::vector<std::uint64_t> split_seeds;
  /// Digest of each split's test indices; equal across strategies.
  std::vector<std::string> split_digests;
  double mean = 0.0;
  double std = 0.0;
  std::optional<Comparison> vs_baseline;
};

struct StrategyRun {
  std::string name;
  train::TrainConfig config;
};

/// One (strategy, split) training run.
struct RunRecord {
  std::size_t strategy_index = 0;
  std::size_t split_index = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t train_seed = 0;
  double test_accuracy = 0.0;
  train::TrainHistory history;
  Model model;
};

struct EvalResult {
  std::vector<SplitReport> reports;
  /// Strategy-major: runs[s * n_splits + i].
  std::vector<RunRecord> runs;
};

struct EvalOptions {
  std::size_t n_splits = 10;
  std::uint64_t base_seed = 0;
  double train_fraction = 0.7;
  std::size_t jobs = 1;
  /// Replaces the default initialization (e.g. to load pretrained embeddings).
  std::function<train::TrainState(const data::Dataset& train, const train::TrainConfig&)> make_start;
};

/// Seed of split i: base_seed + i.
std::uint64_t split_seed(std::uint64_t base_seed, std::size_t split_index);
/// Training seed shared by every strategy on split i.
std::uint64_t train_seed(std::uint64_t base_seed, std::size_t split_index);

/// Trains every strategy on splits seeded base_seed + i, i < n_splits, and
/// compares each strategy to the first with a Welch test. All strategies on
/// split i share the split and the training seed derived from it; the
/// configs' own seed fields are overridden. Runs may execute on `jobs`
/// threads; results do not depend on scheduling.
EvalResult repeated_splits_eval(const data::Dataset& dataset, const std::vector<StrategyRun>& runs,
                                const EvalOptions& options);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

struct SimilarityMatrix {
  ad::Tensor values;  // C x C
  std::vector<std::string> label_names;
};

/// Cosine similarity between label representations. Rejects zero rows.
SimilarityMatrix label_similarity_matrix(const ad::Tensor& label_reps, const std::vector<std::string>& label_names);

/// Mean off-diagonal similarity inside groups and across groups.
struct GroupContrast {
  double within = 0.0;
  double between = 0.0;
};
GroupContrast group_contrast(const SimilarityMatrix& sim, const data::GroupMap& groups);

std::string similarity_csv(const SimilarityMatrix& sim);
/// strategy,split_index,seed,test_accuracy
std::string per_split_csv(const std::vector<SplitReport>& reports);
/// strategy,mean,std,p_vs_baseline
std::string summary_csv(const std::vector<SplitReport>& reports);

}  // namespace lcm::eval
