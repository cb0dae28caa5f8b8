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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lcm/autodiff.hpp"
#include "lcm/model.hpp"

namespace lcm::targets {

struct OneHot {};

struct LabelSmoothing {
  double epsilon = 0.1;
};

/// Label confusion targets.
struct Lcm {
  double alpha = 4.0;
  /// Epochs >= stop_epoch (0-based) train against plain one-hot targets.
  std::optional<int> stop_epoch;
  /// Treat the simulated distribution as a constant in the loss.
  bool detach_target = false;
};

using TargetStrategy = std::variant<OneHot, LabelSmoothing, Lcm>;

/// Smallest alpha accepted for LCM targets.
inline constexpr double kMinAlpha = 0.5;

void validate(const TargetStrategy& strategy);
/// Short display name: "one-hot", "ls(0.1)", "lcm(4)", "lcm(4,stop=10)".
std::string describe(const TargetStrategy& strategy);
/// Inverse of describe. Also accepts "ls" and "lcm" with default parameters.
TargetStrategy parse_strategy(std::string_view text);
bool uses_lcm(const TargetStrategy& strategy);
/// Whether the strategy produces LCM targets at `epoch`.
bool lcm_active(const TargetStrategy& strategy, int epoch);

struct TargetDistribution {
  std::vector<double> values;
  std::string provenance;
};

TargetDistribution one_hot_target(std::int64_t class_id, std::size_t num_classes);

/// (1 - eps) * one_hot + eps / C.
TargetDistribution label_smoothing_target(std::int64_t class_id, std::size_t num_classes, double epsilon);

/// LCD: softmax(s W + b) with similarities s = V_l v (one per label).
std::vector<double> label_confusion_distribution(std::span<const double> representation,
                                                 const ad::Tensor& label_reps, const LcmHeadParams& head);

/// SLD: softmax(alpha * y_t + y_c). `one_hot` must be exactly one-hot.
std::vector<double> simulated_label_distribution(std::span<const double> one_hot,
                                                 std::span<const double> lcd, double alpha);

/// KL(sld || pld).
double lcm_loss(std::span<const double> sld, std::span<const double> pld);

struct LcmInputs {
  std::span<const double> representation;
  const ad::Tensor& label_reps;
  const LcmHeadParams& head;
};

/// Training target of one example under `strategy` at `epoch`. The LCM
/// variant needs `lcm`; after its stop epoch it returns the one-hot target.
TargetDistribution make_target(const TargetStrategy& strategy, std::int64_t class_id, std::size_t num_classes,
                               const std::optional<LcmInputs>& lcm, int epoch);

// ------------------------------------------------------------ tape level

/// Tape handles the LCM branch needs for a batch.
struct LcmBatchInputs {
  ad::Var representations;  // B x d
  ad::Var label_reps;       // C x d
  ad::Var head_weight;      // C x C
  ad::Var head_bias;        // C
};

ad::Tensor one_hot_rows(std::span<const std::int32_t> labels, std::size_t num_classes);

/// B x C LCD rows.
ad::Var label_confusion_batch(const LcmBatchInputs& in);

/// B x C SLD rows from constant one-hot rows and the LCD.
ad::Var simulated_label_batch(ad::Var one_hot, ad::Var lcd, double alpha);

/// Batch of training targets. For LCM strategies at active epochs `lcm`
/// must be provided and gradients flow into it unless detach_target is set.
ad::Var target_batch(ad::Tape& tape, const TargetStrategy& strategy, std::span<const std::int32_t> labels,
                     std::size_t num_classes, int epoch, const std::optional<LcmBatchInputs>& lcm);

}  // namespace lcm::targets
