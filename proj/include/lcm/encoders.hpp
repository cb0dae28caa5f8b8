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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lcm/autodiff.hpp"
#include "lcm/data.hpp"
#include "lcm/model.hpp"

namespace lcm::enc {

/// Predictor parameters placed on a tape.
struct PredictorVars {
  std::optional<ad::Var> embedding;
  ad::Var hidden_weight;
  ad::Var hidden_bias;
  ad::Var classifier_weight;
  ad::Var classifier_bias;
};

/// LCM parameters placed on a tape.
struct LcmVars {
  ad::Var label_embedding;
  ad::Var label_hidden_weight;
  ad::Var label_hidden_bias;
  ad::Var head_weight;
  ad::Var head_bias;
};

/// Trainable bindings report gradients under the checkpoint names.
PredictorVars bind(ad::Tape& tape, const Predictor& p, bool trainable);
LcmVars bind(ad::Tape& tape, const LcmParams& p, bool trainable);

/// B x d input representations for a batch (all text or all vectors).
ad::Var encode_text_batch(const PredictorVars& p, std::span<const data::Example* const> batch);
/// B x C class logits.
ad::Var classifier_logits(const PredictorVars& p, ad::Var representations);
/// C x d label representation matrix; row k belongs to class k.
ad::Var encode_labels_batch(const LcmVars& p);

/// Representation v of one example: tanh(pool(x) W + b).
std::vector<double> encode_text(const data::Example& example, const TextEncoderParams& params);

/// C x d label representations. Requires C >= 2 rows in the label embedding.
ad::Tensor encode_labels(std::size_t num_classes, const LabelEncoderParams& params);

/// Predicted label distribution softmax(v W + b).
std::vector<double> predict_distribution(std::span<const double> representation,
                                         const ClassifierParams& params);

/// Argmax class per example. Uses only the predictor.
std::vector<std::int32_t> predict(const Predictor& predictor, const data::Dataset& dataset,
                                  std::size_t batch_size = 256);

}  // namespace lcm::enc
