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

// Dense float64 tensors with a recorded tape for reverse-mode gradients.
//
// The primitive set is closed: matmul, transpose, add, sub, mul, scale,
// add_bias (row broadcast of a vector), tanh, log (clamped), softmax (last
// axis), mean (axis), gather (rows), embedding_bag (segment mean of gathered
// rows), sum, kl_div. There is no general broadcasting.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lcm::ad {

using Shape = std::vector<std::size_t>;

/// Lower clamp applied to probabilities before taking a log.
inline constexpr double kLogFloor = 1e-12;

class Tensor {
 public:
  /// Scalar zero.
  Tensor() : data_(1, 0.0) {}
  /// Zeros of the given shape.
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor scalar(double v) { return Tensor(Shape{}, {v}); }
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> v);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }
  std::span<const double> row(std::size_t r) const;

  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  bool all_finite() const;
  std::string shape_string() const;

  /// Bitwise equality of shape and data.
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
};

std::string shape_string(const Shape& shape);

using GradientMap = std::map<std::string, Tensor>;
using TensorMap = std::map<std::string, Tensor>;

enum class Prim {
  kLeaf,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddBias,
  kTanh,
  kLog,
  kSoftmax,
  kMean,
  kGather,
  kEmbeddingBag,
  kSum,
  kKlDiv,
};

std::string_view prim_name(Prim p);
/// Throws ValidationError for unknown names.
Prim prim_from_name(std::string_view name);

/// Non-tensor operands of a primitive.
struct Attrs {
  double scalar = 0.0;               // scale
  std::size_t axis = 0;              // mean
  std::vector<std::size_t> index;    // gather, embedding_bag
  std::vector<std::size_t> offsets;  // embedding_bag segment bounds
};

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
};

struct Node {
  Prim prim = Prim::kLeaf;
  std::vector<std::size_t> parents;
  Attrs attrs;
  Tensor value;
  bool requires_grad = false;
  std::string name;  // set for parameters
};

/// Records every primitive applied; parents always precede their children.
///
/// A tape is a single-writer value confined to one computation; it is not
/// synchronized.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Trainable leaf; gradients are reported under `name`.
  Var parameter(std::string name, Tensor value);
  Var constant(Tensor value);
  /// Constant copy of `v`'s current value; gradients stop here.
  Var detach(Var v);

  /// Evaluates `prim` on `inputs` and records it.
  Var apply(Prim prim, std::span<const Var> inputs, Attrs attrs = {});
  Var apply(std::string_view prim, std::span<const Var> inputs,
            Attrs attrs = {});

  const Tensor& value(Var v) const;
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  /// Recomputes every non-leaf node from its parents.
  void replay();

  /// Gradients of a scalar `loss` with respect to every parameter on the
  /// tape. Parameters the loss does not depend on get zero tensors.
  GradientMap backprop(Var loss) const;

 private:
  Var push(Node node);
  void check_owned(Var v) const;

  std::vector<Node> nodes_;
};

// Primitive wrappers. All operands must live on the same tape.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_bias(Var x, Var bias);
Var tanh(Var x);
Var log(Var x);
Var softmax(Var x);
Var mean(Var x, std::size_t axis);
Var gather(Var table, std::vector<std::size_t> rows);
/// Row b of the result is the mean of table rows
/// ids[offsets[b]] .. ids[offsets[b+1]-1]. Every segment must be nonempty.
Var embedding_bag(Var table, std::vector<std::size_t> ids,
                  std::vector<std::size_t> offsets);
Var sum(Var x);
/// KL(target || predicted) along the last axis; rank-2 inputs are averaged
/// over rows. Predicted entries are clamped at kLogFloor and 0*log(0) = 0.
Var kl_div(Var target, Var predicted);

/// Numerically safe softmax of a plain vector.
std::vector<double> softmax(std::span<const double> logits);

/// KL(target || predicted) in nats for two probability vectors. Both must
/// sum to 1 within 1e-6.
double kl_divergence(std::span<const double> target,
                     std::span<const double> predicted);

}  // namespace lcm::ad
