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

#include "lcm/encoders.hpp"

#include <algorithm>

#include "lcm/error.hpp"

namespace lcm::enc {
namespace {

ad::Var put(ad::Tape& tape, const char* name, const ad::Tensor& t, bool trainable) {
  return trainable ? tape.parameter(name, t) : tape.constant(t);
}

ad::Tensor row_tensor(std::span<const double> v) {
  return ad::Tensor::matrix(1, v.size(), std::vector<double>(v.begin(), v.end()));
}

}  // namespace

PredictorVars bind(ad::Tape& tape, const Predictor& p, bool trainable) {
  PredictorVars v;
  if (p.text.embedding) v.embedding = put(tape, param::kTextEmbedding, *p.text.embedding, trainable);
  v.hidden_weight = put(tape, param::kTextHiddenWeight, p.text.hidden_weight, trainable);
  v.hidden_bias = put(tape, param::kTextHiddenBias, p.text.hidden_bias, trainable);
  v.classifier_weight = put(tape, param::kClassifierWeight, p.classifier.weight, trainable);
  v.classifier_bias = put(tape, param::kClassifierBias, p.classifier.bias, trainable);
  return v;
}

LcmVars bind(ad::Tape& tape, const LcmParams& p, bool trainable) {
  LcmVars v;
  v.label_embedding = put(tape, param::kLabelEmbedding, p.label.embedding, trainable);
  v.label_hidden_weight = put(tape, param::kLabelHiddenWeight, p.label.hidden_weight, trainable);
  v.label_hidden_bias = put(tape, param::kLabelHiddenBias, p.label.hidden_bias, trainable);
  v.head_weight = put(tape, param::kLcmWeight, p.head.weight, trainable);
  v.head_bias = put(tape, param::kLcmBias, p.head.bias, trainable);
  return v;
}

ad::Var encode_text_batch(const PredictorVars& p, std::span<const data::Example* const> batch) {
  if (batch.empty()) throw ValidationError("encode_text: empty batch");
  ad::Var pooled;
  if (batch.front()->is_vector()) {
    const std::size_t f = batch.front()->features.size();
    std::vector<double> x;
    x.reserve(batch.size() * f);
    for (const data::Example* ex : batch) {
      if (ex->features.size() != f) throw ShapeError("encode_text: feature dimensions differ within a batch");
      x.insert(x.end(), ex->features.begin(), ex->features.end());
    }
    pooled = p.hidden_weight.tape->constant(ad::Tensor::matrix(batch.size(), f, std::move(x)));
  } else {
    if (!p.embedding) throw ValidationError("encode_text: token input but the encoder has no embedding table");
    std::vector<std::size_t> ids;
    std::vector<std::size_t> offsets{0};
    for (const data::Example* ex : batch) {
      if (ex->is_vector()) throw ValidationError("encode_text: batch mixes token and vector inputs");
      if (ex->length == 0) throw ValidationError("encode_text: empty token sequence");
      for (std::size_t t = 0; t < ex->length; ++t) ids.push_back(static_cast<std::size_t>(ex->token_ids[t]));
      offsets.push_back(ids.size());
    }
    pooled = ad::embedding_bag(*p.embedding, std::move(ids), std::move(offsets));
  }
  return ad::tanh(ad::add_bias(ad::matmul(pooled, p.hidden_weight), p.hidden_bias));
}

ad::Var classifier_logits(const PredictorVars& p, ad::Var representations) {
  return ad::add_bias(ad::matmul(representations, p.classifier_weight), p.classifier_bias);
}

ad::Var encode_labels_batch(const LcmVars& p) {
  return ad::tanh(ad::add_bias(ad::matmul(p.label_embedding, p.label_hidden_weight), p.label_hidden_bias));
}

std::vector<double> encode_text(const data::Example& example, const TextEncoderParams& params) {
  if (!example.is_vector() && example.length == 0) throw ValidationError("encode_text: empty input");
  ad::Tape tape;
  Predictor p;
  p.text = params;
  // The classifier is not used; a placeholder keeps bind() uniform.
  p.classifier.weight = ad::Tensor(ad::Shape{params.dim(), 1});
  p.classifier.bias = ad::Tensor(ad::Shape{1});
  auto vars = bind(tape, p, false);
  const data::Example* batch[] = {&example};
  const auto& out = tape.value(encode_text_batch(vars, batch));
  return out.values();
}

ad::Tensor encode_labels(std::size_t num_classes, const LabelEncoderParams& params) {
  if (num_classes < 2) throw ValidationError("encode_labels: need at least 2 classes");
  if (params.embedding.rank() != 2 || params.embedding.rows() != num_classes)
    throw ShapeError("encode_labels: label embedding " + params.embedding.shape_string() + " does not have " +
                     std::to_string(num_classes) + " rows");
  ad::Tape tape;
  auto e = tape.constant(params.embedding);
  auto w = tape.constant(params.hidden_weight);
  auto b = tape.constant(params.hidden_bias);
  return tape.value(ad::tanh(ad::add_bias(ad::matmul(e, w), b)));
}

std::vector<double> predict_distribution(std::span<const double> representation,
                                         const ClassifierParams& params) {
  if (params.weight.rank() != 2 || params.weight.rows() != representation.size())
    throw ShapeError("predict_distribution: representation of length " + std::to_string(representation.size()) +
                     " does not match projection " + params.weight.shape_string());
  ad::Tape tape;
  auto v = tape.constant(row_tensor(representation));
  auto logits = ad::add_bias(ad::matmul(v, tape.constant(params.weight)), tape.constant(params.bias));
  return tape.value(ad::softmax(logits)).values();
}

std::vector<std::int32_t> predict(const Predictor& predictor, const data::Dataset& dataset,
                                  std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("predict: batch_size must be positive");
  std::vector<std::int32_t> out;
  out.reserve(dataset.size());
  std::vector<const data::Example*> batch;
  for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
    const std::size_t end = std::min(dataset.size(), start + batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset.examples[i]);
    ad::Tape tape;
    auto vars = bind(tape, predictor, false);
    const auto& logits = tape.value(classifier_logits(vars, encode_text_batch(vars, batch)));
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      auto row = logits.row(r);
      out.push_back(static_cast<std::int32_t>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
  }
  return out;
}

}  // namespace lcm::enc
