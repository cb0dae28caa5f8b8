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
#include <string>
#include <vector>

#include "lcm/autodiff.hpp"
#include "lcm/data.hpp"
#include "lcm/model.hpp"
#include "lcm/targets.hpp"

namespace lcm::train {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 128;
  int epochs = 30;
  std::uint64_t seed = 0;
  targets::TargetStrategy strategy = targets::OneHot{};
  std::size_t dim = 64;
  std::size_t max_len = 256;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, adam_epsilon}; }
};

struct AdamState {
  ad::TensorMap first_moment;
  ad::TensorMap second_moment;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update of every entry of `params`. Moments are
/// created on first use. Throws when a gradient is missing or non-finite.
void adam_step(ad::TensorMap& params, const ad::GradientMap& grads, AdamState& state, const AdamConfig& config);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  /// Whether LCM targets were in effect this epoch.
  bool lcm_active = false;
};

using TrainHistory = std::vector<EpochRecord>;

/// Everything needed to continue a run bit-identically.
struct TrainState {
  Model model;
  AdamState adam;
  int next_epoch = 0;
};

/// Fresh model for `config` (LCM parameters only for LCM strategies).
TrainState initial_state(const data::Dataset& train, const TrainConfig& config);

/// One pass over `train` in a per-epoch seeded order. Label representations
/// are computed once per batch; the final partial batch is included.
/// Fills everything but test_acc.
EpochRecord train_epoch(TrainState& state, const data::Dataset& train, const TrainConfig& config, int epoch);

using EpochCallback = std::function<void(const TrainState&, const EpochRecord&)>;

struct TrainResult {
  TrainState state;
  TrainHistory history;
};

/// Runs epochs start.next_epoch .. config.epochs - 1, scoring the test set
/// with the predictor alone after each. `start` defaults to
/// initial_state(train, config).
TrainResult train_run(const data::Dataset& train, const data::Dataset& test, const TrainConfig& config,
                      std::optional<TrainState> start = std::nullopt, const EpochCallback& on_epoch = {});

std::string history_csv(const TrainHistory& history);
void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);

/// Full training state as JSON (parameters, Adam moments, step, next epoch).
void save_train_state(const std::filesystem::path& path, const TrainState& state);
TrainState load_train_state(const std::filesystem::path& path);

}  // namespace lcm::train
