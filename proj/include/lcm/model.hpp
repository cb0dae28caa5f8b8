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
#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "lcm/autodiff.hpp"

namespace lcm {

// Checkpoint names of every trainable tensor.
namespace param {
inline constexpr const char* kTextEmbedding = "text.embedding";
inline constexpr const char* kTextHiddenWeight = "text.hidden.weight";
inline constexpr const char* kTextHiddenBias = "text.hidden.bias";
inline constexpr const char* kClassifierWeight = "classifier.weight";
inline constexpr const char* kClassifierBias = "classifier.bias";
inline constexpr const char* kLabelEmbedding = "label.embedding";
inline constexpr const char* kLabelHiddenWeight = "label.hidden.weight";
inline constexpr const char* kLabelHiddenBias = "label.hidden.bias";
inline constexpr const char* kLcmWeight = "lcm.weight";
inline constexpr const char* kLcmBias = "lcm.bias";
}  // namespace param

/// Input encoder: mean-pooled embeddings (text) or raw features (vectors),
/// then one tanh layer. `hidden_weight` is in_dim x d.
struct TextEncoderParams {
  std::optional<ad::Tensor> embedding;  // |V| x d; absent on the vector path
  ad::Tensor hidden_weight;
  ad::Tensor hidden_bias;

  std::size_t dim() const { return hidden_bias.size(); }
  std::size_t input_dim() const { return hidden_weight.rows(); }
};

/// Label encoder: C x d label embedding, then one tanh layer (d x d).
struct LabelEncoderParams {
  ad::Tensor embedding;
  ad::Tensor hidden_weight;
  ad::Tensor hidden_bias;
};

/// d x C projection to class logits.
struct ClassifierParams {
  ad::Tensor weight;
  ad::Tensor bias;

  std::size_t num_classes() const { return bias.size(); }
};

/// Maps the C instance-label similarities to LCD logits: C x C weight, C bias.
struct LcmHeadParams {
  ad::Tensor weight;
  ad::Tensor bias;
};

/// Everything inference needs.
struct Predictor {
  TextEncoderParams text;
  ClassifierParams classifier;
};

/// Training-only parameters.
struct LcmParams {
  LabelEncoderParams label;
  LcmHeadParams head;
};

struct ModelShape {
  std::size_t vocab_size = 0;   // text path; includes the reserved ids
  std::size_t feature_dim = 0;  // vector path when nonzero
  std::size_t dim = 64;
  std::size_t classes = 0;
};

struct Model {
  Predictor predictor;
  std::optional<LcmParams> lcm;

  std::size_t num_classes() const { return predictor.classifier.num_classes(); }
  ad::TensorMap to_tensors() const;
  /// Inverse of to_tensors. The LCM part is restored only when its tensors
  /// are all present.
  static Model from_tensors(const ad::TensorMap& tensors);
};

Predictor predictor_from_tensors(const ad::TensorMap& tensors);
ad::TensorMap predictor_tensors(const Predictor& predictor);

/// Embeddings uniform in [-0.05, 0.05], dense layers Glorot-uniform, biases
/// zero. The predictor and the LCM part draw from separate streams derived
/// from `seed`, so the predictor initialization does not depend on whether
/// the LCM part is present.
Model init_model(const ModelShape& shape, bool with_lcm, std::uint64_t seed);

/// Checkpoint document: {name: {"shape": [...], "data": [...]}}. Values are
/// written in shortest round-trip form, so loading reproduces every bit.
nlohmann::json checkpoint_to_json(const ad::TensorMap& tensors);
ad::TensorMap checkpoint_from_json(const nlohmann::json& doc);
void save_checkpoint(const std::filesystem::path& path, const ad::TensorMap& tensors);
ad::TensorMap load_checkpoint(const std::filesystem::path& path);

}  // namespace lcm
