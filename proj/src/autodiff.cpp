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

#include "lcm/autodiff.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <utility>

#include "lcm/error.hpp"

namespace lcm::ad {
namespace {

std::size_t shape_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

[[noreturn]] void shape_fail(Prim p, std::span<const Tensor* const> in,
                             std::string_view why) {
  std::ostringstream os;
  os << prim_name(p) << ": " << why << " (operand shapes";
  for (const Tensor* t : in) os << ' ' << t->shape_string();
  os << ')';
  throw ShapeError(os.str());
}

void require(bool ok, Prim p, std::span<const Tensor* const> in,
             std::string_view why) {
  if (!ok) shape_fail(p, in, why);
}

constexpr std::array<std::pair<Prim, std::string_view>, 16> kNames{{
    {Prim::kLeaf, "leaf"},
    {Prim::kMatMul, "matmul"},
    {Prim::kTranspose, "transpose"},
    {Prim::kAdd, "add"},
    {Prim::kSub, "sub"},
    {Prim::kMul, "mul"},
    {Prim::kScale, "scale"},
    {Prim::kAddBias, "add_bias"},
    {Prim::kTanh, "tanh"},
    {Prim::kLog, "log"},
    {Prim::kSoftmax, "softmax"},
    {Prim::kMean, "mean"},
    {Prim::kGather, "gather"},
    {Prim::kEmbeddingBag, "embedding_bag"},
    {Prim::kSum, "sum"},
    {Prim::kKlDiv, "kl_div"},
}};

std::size_t arity(Prim p) {
  switch (p) {
    case Prim::kLeaf:
      return 0;
    case Prim::kMatMul:
    case Prim::kAdd:
    case Prim::kSub:
    case Prim::kMul:
    case Prim::kAddBias:
    case Prim::kKlDiv:
      return 2;
    default:
      return 1;
  }
}

// Softmax over the last axis, in place on rows of length `width`.
void softmax_rows(std::span<double> data, std::size_t width) {
  for (std::size_t start = 0; start < data.size(); start += width) {
    auto row = data.subspan(start, width);
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& x : row) {
      x = std::exp(x - peak);
      total += x;
    }
    for (double& x : row) x /= total;
  }
}

std::size_t last_dim(const Tensor& t) {
  return t.rank() == 0 ? 1 : t.shape().back();
}

Tensor forward(Prim p, std::span<const Tensor* const> in, const Attrs& at) {
  require(in.size() == arity(p), p, in, "wrong operand count");
  switch (p) {
    case Prim::kLeaf:
      break;
    case Prim::kMatMul: {
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      require(a.rank() == 2 && b.rank() == 2, p, in, "operands must be rank 2");
      require(a.cols() == b.rows(), p, in, "inner dimensions differ");
      const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
      Tensor out(Shape{m, n});
      auto o = out.data();
      auto ad = a.data();
      auto bd = b.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
          const double aik = ad[i * k + kk];
          if (aik == 0.0) continue;
          const double* brow = &bd[kk * n];
          double* orow = &o[i * n];
          for (std::size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
      }
      return out;
    }
    case Prim::kTranspose: {
      const Tensor& a = *in[0];
      require(a.rank() == 2, p, in, "operand must be rank 2");
      Tensor out(Shape{a.cols(), a.rows()});
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
      return out;
    }
    case Prim::kAdd:
    case Prim::kSub:
    case Prim::kMul: {
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      require(a.shape() == b.shape(), p, in, "shapes differ");
      Tensor out(a.shape());
      for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = p == Prim::kAdd   ? a[i] + b[i]
                 : p == Prim::kSub ? a[i] - b[i]
                                   : a[i] * b[i];
      }
      return out;
    }
    case Prim::kScale: {
      Tensor out = *in[0];
      out.set_requires_grad(false);
      for (double& x : out.data()) x *= at.scalar;
      return out;
    }
    case Prim::kAddBias: {
      const Tensor& x = *in[0];
      const Tensor& b = *in[1];
      require(x.rank() == 2 && b.rank() == 1 && b.size() == x.cols(), p, in,
              "bias length must equal the column count");
      Tensor out = x;
      out.set_requires_grad(false);
      const std::size_t n = x.cols();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i % n];
      return out;
    }
    case Prim::kTanh:
    case Prim::kLog: {
      Tensor out = *in[0];
      out.set_requires_grad(false);
      for (double& x : out.data()) {
        x = p == Prim::kTanh ? std::tanh(x) : std::log(std::max(x, kLogFloor));
      }
      return out;
    }
    case Prim::kSoftmax: {
      const Tensor& x = *in[0];
      require(x.rank() == 1 || x.rank() == 2, p, in, "operand must be rank 1 or 2");
      require(x.size() > 0, p, in, "empty operand");
      Tensor out = x;
      out.set_requires_grad(false);
      softmax_rows(out.data(), last_dim(x));
      return out;
    }
    case Prim::kMean: {
      const Tensor& x = *in[0];
      require(x.rank() == 1 || x.rank() == 2, p, in, "operand must be rank 1 or 2");
      require(at.axis < x.rank(), p, in, "axis out of range");
      require(x.size() > 0, p, in, "empty operand");
      if (x.rank() == 1) {
        double total = 0.0;
        for (double v : x.data()) total += v;
        return Tensor::scalar(total / static_cast<double>(x.size()));
      }
      const std::size_t r = x.rows(), c = x.cols();
      if (at.axis == 0) {
        Tensor out(Shape{c});
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) out[j] += x.at(i, j);
        for (double& v : out.data()) v /= static_cast<double>(r);
        return out;
      }
      Tensor out(Shape{r});
      for (std::size_t i = 0; i < r; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < c; ++j) total += x.at(i, j);
        out[i] = total / static_cast<double>(c);
      }
      return out;
    }
    case Prim::kGather:
    case Prim::kEmbeddingBag: {
      const Tensor& table = *in[0];
      require(table.rank() == 2, p, in, "table must be rank 2");
      for (std::size_t id : at.index) {
        require(id < table.rows(), p, in, "row index out of range");
      }
      const std::size_t d = table.cols();
      if (p == Prim::kGather) {
        Tensor out(Shape{at.index.size(), d});
        for (std::size_t i = 0; i < at.index.size(); ++i) {
          auto src = table.row(at.index[i]);
          std::copy(src.begin(), src.end(), out.data().begin() + i * d);
        }
        return out;
      }
      const auto& off = at.offsets;
      require(off.size() >= 2 && off.front() == 0 &&
                  off.back() == at.index.size(),
              p, in, "offsets must span the index list");
      const std::size_t bags = off.size() - 1;
      Tensor out(Shape{bags, d});
      for (std::size_t b = 0; b < bags; ++b) {
        require(off[b] < off[b + 1], p, in, "empty segment");
        double* dst = &out.data()[b * d];
        for (std::size_t k = off[b]; k < off[b + 1]; ++k) {
          auto src = table.row(at.index[k]);
          for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        }
        const double inv = 1.0 / static_cast<double>(off[b + 1] - off[b]);
        for (std::size_t j = 0; j < d; ++j) dst[j] *= inv;
      }
      return out;
    }
    case Prim::kSum: {
      double total = 0.0;
      for (double v : in[0]->data()) total += v;
      return Tensor::scalar(total);
    }
    case Prim::kKlDiv: {
      const Tensor& t = *in[0];
      const Tensor& q = *in[1];
      require(t.shape() == q.shape(), p, in, "shapes differ");
      require(t.rank() == 1 || t.rank() == 2, p, in, "operands must be rank 1 or 2");
      require(t.size() > 0, p, in, "empty operand");
      const std::size_t rows = t.rank() == 1 ? 1 : t.rows();
      double total = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] > 0.0) total += t[i] * (std::log(t[i]) - std::log(std::max(q[i], kLogFloor)));
      }
      return Tensor::scalar(total / static_cast<double>(rows));
    }
  }
  shape_fail(p, in, "not evaluable");
}

// Accumulates d(loss)/d(input_k) into grads[k] (null when not needed).
void backward(Prim p, std::span<const Tensor* const> in, const Tensor& out,
              const Tensor& g, const Attrs& at, std::span<Tensor* const> grads) {
  switch (p) {
    case Prim::kLeaf:
      return;
    case Prim::kMatMul: {
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
      if (grads[0]) {  // dA = G * B^T
        auto ga = grads[0]->data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t kk = 0; kk < k; ++kk) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * b[kk * n + j];
            ga[i * k + kk] += acc;
          }
      }
      if (grads[1]) {  // dB = A^T * G
        auto gb = grads[1]->data();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a[i * k + kk];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) gb[kk * n + j] += aik * g[i * n + j];
          }
      }
      return;
    }
    case Prim::kTranspose: {
      const Tensor& a = *in[0];
      if (grads[0]) {
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j)
            grads[0]->at(i, j) += g[j * a.rows() + i];
      }
      return;
    }
    case Prim::kAdd:
    case Prim::kSub:
    case Prim::kMul: {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (grads[0]) (*grads[0])[i] += p == Prim::kMul ? g[i] * (*in[1])[i] : g[i];
        if (grads[1]) {
          (*grads[1])[i] += p == Prim::kAdd   ? g[i]
                            : p == Prim::kSub ? -g[i]
                                              : g[i] * (*in[0])[i];
        }
      }
      return;
    }
    case Prim::kScale:
      if (grads[0])
        for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += at.scalar * g[i];
      return;
    case Prim::kAddBias: {
      const std::size_t n = in[0]->cols();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (grads[0]) (*grads[0])[i] += g[i];
        if (grads[1]) (*grads[1])[i % n] += g[i];
      }
      return;
    }
    case Prim::kTanh:
      if (grads[0])
        for (std::size_t i = 0; i < g.size(); ++i)
          (*grads[0])[i] += g[i] * (1.0 - out[i] * out[i]);
      return;
    case Prim::kLog:
      if (grads[0])
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double x = (*in[0])[i];
          if (x > kLogFloor) (*grads[0])[i] += g[i] / x;
        }
      return;
    case Prim::kSoftmax: {
      if (!grads[0]) return;
      const std::size_t w = last_dim(out);
      for (std::size_t start = 0; start < out.size(); start += w) {
        double dot = 0.0;
        for (std::size_t j = 0; j < w; ++j) dot += g[start + j] * out[start + j];
        for (std::size_t j = 0; j < w; ++j)
          (*grads[0])[start + j] += out[start + j] * (g[start + j] - dot);
      }
      return;
    }
    case Prim::kMean: {
      if (!grads[0]) return;
      const Tensor& x = *in[0];
      if (x.rank() == 1) {
        const double share = g[0] / static_cast<double>(x.size());
        for (double& v : grads[0]->data()) v += share;
        return;
      }
      const std::size_t r = x.rows(), c = x.cols();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
          grads[0]->at(i, j) += at.axis == 0 ? g[j] / static_cast<double>(r)
                                             : g[i] / static_cast<double>(c);
        }
      return;
    }
    case Prim::kGather: {
      if (!grads[0]) return;
      const std::size_t d = in[0]->cols();
      for (std::size_t i = 0; i < at.index.size(); ++i) {
        double* dst = &grads[0]->data()[at.index[i] * d];
        for (std::size_t j = 0; j < d; ++j) dst[j] += g[i * d + j];
      }
      return;
    }
    case Prim::kEmbeddingBag: {
      if (!grads[0]) return;
      const std::size_t d = in[0]->cols();
      const auto& off = at.offsets;
      for (std::size_t b = 0; b + 1 < off.size(); ++b) {
        const double inv = 1.0 / static_cast<double>(off[b + 1] - off[b]);
        for (std::size_t k = off[b]; k < off[b + 1]; ++k) {
          double* dst = &grads[0]->data()[at.index[k] * d];
          for (std::size_t j = 0; j < d; ++j) dst[j] += g[b * d + j] * inv;
        }
      }
      return;
    }
    case Prim::kSum:
      if (grads[0])
        for (double& v : grads[0]->data()) v += g[0];
      return;
    case Prim::kKlDiv: {
      const Tensor& t = *in[0];
      const Tensor& q = *in[1];
      const std::size_t rows = t.rank() == 1 ? 1 : t.rows();
      const double s = g[0] / static_cast<double>(rows);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double qc = std::max(q[i], kLogFloor);
        if (grads[0]) {
          // d/dt [t log t - t log q] = log t + 1 - log q; t is floored so
          // zero-mass entries get a finite slope.
          const double tc = std::max(t[i], kLogFloor);
          (*grads[0])[i] += s * (std::log(tc) + 1.0 - std::log(qc));
        }
        if (grads[1] && q[i] > kLogFloor) (*grads[1])[i] -= s * t[i] / q[i];
      }
      return;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- Tensor

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : shape_(std::move(shape)), data_(std::move(data)), requires_grad_(requires_grad) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("Tensor: zero dimension in " + shape_string());
  }
  if (shape_product(shape_) != data_.size()) {
    throw ShapeError("Tensor: shape " + shape_string() + " needs " +
                     std::to_string(shape_product(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape{n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor(Shape{rows, cols}, std::move(v));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows(): tensor " + shape_string() + " is not rank 2");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols(): tensor " + shape_string() + " is not rank 2");
  return shape_[1];
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item(): tensor " + shape_string() + " is not a scalar");
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string Tensor::shape_string() const { return ad::shape_string(shape_); }

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_) return false;
  // Bitwise, so that -0.0 != 0.0 and NaN payloads compare by representation.
  for (std::size_t i = 0; i < a.data_.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.data_[i]) != std::bit_cast<std::uint64_t>(b.data_[i]))
      return false;
  }
  return true;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s + ']';
}

std::string_view prim_name(Prim p) {
  for (const auto& [prim, name] : kNames)
    if (prim == p) return name;
  return "?";
}

Prim prim_from_name(std::string_view name) {
  for (const auto& [prim, n] : kNames)
    if (n == name && prim != Prim::kLeaf) return prim;
  throw ValidationError("unknown primitive '" + std::string(name) + "'");
}

// ------------------------------------------------------------------ Tape

const Tensor& Var::value() const {
  if (!tape) throw ValidationError("Var is not bound to a tape");
  return tape->value(*this);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

void Tape::check_owned(Var v) const {
  if (v.tape != this || v.id >= nodes_.size())
    throw ValidationError("Var does not belong to this tape");
}

Var Tape::parameter(std::string name, Tensor value) {
  value.set_requires_grad(true);
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.name = std::move(name);
  return push(std::move(n));
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::detach(Var v) {
  check_owned(v);
  return constant(nodes_[v.id].value);
}

Var Tape::apply(Prim prim, std::span<const Var> inputs, Attrs attrs) {
  if (prim == Prim::kLeaf) throw ValidationError("apply: leaf is not a primitive");
  std::vector<const Tensor*> in;
  Node n;
  n.prim = prim;
  for (Var v : inputs) {
    check_owned(v);
    in.push_back(&nodes_[v.id].value);
    n.parents.push_back(v.id);
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  n.value = forward(prim, in, attrs);
  n.value.set_requires_grad(n.requires_grad);
  n.attrs = std::move(attrs);
  return push(std::move(n));
}

Var Tape::apply(std::string_view prim, std::span<const Var> inputs, Attrs attrs) {
  return apply(prim_from_name(prim), inputs, std::move(attrs));
}

const Tensor& Tape::value(Var v) const {
  check_owned(v);
  return nodes_[v.id].value;
}

void Tape::replay() {
  std::vector<const Tensor*> in;
  for (Node& n : nodes_) {
    if (n.prim == Prim::kLeaf) continue;
    in.clear();
    for (std::size_t p : n.parents) in.push_back(&nodes_[p].value);
    const bool rg = n.requires_grad;
    n.value = forward(n.prim, in, n.attrs);
    n.value.set_requires_grad(rg);
  }
}

GradientMap Tape::backprop(Var loss) const {
  check_owned(loss);
  const Tensor& lv = nodes_[loss.id].value;
  if (lv.size() != 1) {
    throw ShapeError("backprop: loss must be a scalar, got " + lv.shape_string());
  }
  std::vector<Tensor> grads(loss.id + 1);
  std::vector<bool> live(loss.id + 1, false);
  grads[loss.id] = Tensor(lv.shape(), {1.0});
  live[loss.id] = true;

  std::vector<const Tensor*> in;
  std::vector<Tensor*> out_grads;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!live[id] || n.prim == Prim::kLeaf || !n.requires_grad) continue;
    in.clear();
    out_grads.clear();
    for (std::size_t p : n.parents) {
      in.push_back(&nodes_[p].value);
      if (nodes_[p].requires_grad) {
        if (!live[p]) {
          grads[p] = Tensor(nodes_[p].value.shape());
          live[p] = true;
        }
        out_grads.push_back(&grads[p]);
      } else {
        out_grads.push_back(nullptr);
      }
    }
    backward(n.prim, in, n.value, grads[id], n.attrs, out_grads);
  }

  GradientMap result;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    if (n.prim != Prim::kLeaf || !n.requires_grad) continue;
    Tensor g = id <= loss.id && live[id] ? std::move(grads[id]) : Tensor(n.value.shape());
    auto [it, fresh] = result.emplace(n.name, std::move(g));
    if (!fresh) throw ValidationError("backprop: duplicate parameter name '" + n.name + "'");
  }
  return result;
}

// ------------------------------------------------------------- wrappers

namespace {

Tape& tape_of(std::initializer_list<Var> vars) {
  Tape* t = vars.begin()->tape;
  for (Var v : vars)
    if (v.tape == nullptr || v.tape != t) throw ValidationError("operands live on different tapes");
  return *t;
}

Var apply2(Prim p, Var a, Var b, Attrs at = {}) {
  const std::array<Var, 2> in{a, b};
  return tape_of({a, b}).apply(p, in, std::move(at));
}

Var apply1(Prim p, Var a, Attrs at = {}) {
  const std::array<Var, 1> in{a};
  return tape_of({a}).apply(p, in, std::move(at));
}

}  // namespace

Var matmul(Var a, Var b) { return apply2(Prim::kMatMul, a, b); }
Var transpose(Var a) { return apply1(Prim::kTranspose, a); }
Var add(Var a, Var b) { return apply2(Prim::kAdd, a, b); }
Var sub(Var a, Var b) { return apply2(Prim::kSub, a, b); }
Var mul(Var a, Var b) { return apply2(Prim::kMul, a, b); }
Var scale(Var a, double factor) {
  Attrs at;
  at.scalar = factor;
  return apply1(Prim::kScale, a, std::move(at));
}
Var add_bias(Var x, Var bias) { return apply2(Prim::kAddBias, x, bias); }
Var tanh(Var x) { return apply1(Prim::kTanh, x); }
Var log(Var x) { return apply1(Prim::kLog, x); }
Var softmax(Var x) { return apply1(Prim::kSoftmax, x); }
Var mean(Var x, std::size_t axis) {
  Attrs at;
  at.axis = axis;
  return apply1(Prim::kMean, x, std::move(at));
}
Var gather(Var table, std::vector<std::size_t> rows) {
  Attrs at;
  at.index = std::move(rows);
  return apply1(Prim::kGather, table, std::move(at));
}
Var embedding_bag(Var table, std::vector<std::size_t> ids, std::vector<std::size_t> offsets) {
  Attrs at;
  at.index = std::move(ids);
  at.offsets = std::move(offsets);
  return apply1(Prim::kEmbeddingBag, table, std::move(at));
}
Var sum(Var x) { return apply1(Prim::kSum, x); }
Var kl_div(Var target, Var predicted) { return apply2(Prim::kKlDiv, target, predicted); }

// ------------------------------------------------------- value helpers

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ValidationError("softmax: empty logit vector");
  for (double z : logits)
    if (!std::isfinite(z)) throw ValidationError("softmax: non-finite logit");
  std::vector<double> out(logits.begin(), logits.end());
  softmax_rows(out, out.size());
  return out;
}

double kl_divergence(std::span<const double> target, std::span<const double> predicted) {
  if (target.size() != predicted.size()) {
    throw ShapeError("kl_divergence: length mismatch (" + std::to_string(target.size()) +
                     " vs " + std::to_string(predicted.size()) + ")");
  }
  if (target.empty()) throw ShapeError("kl_divergence: empty distributions");
  auto check = [](std::span<const double> p, const char* which) {
    double total = 0.0;
    for (double x : p) {
      if (!(x >= 0.0) || !std::isfinite(x))
        throw ValidationError(std::string("kl_divergence: ") + which + " has a negative or non-finite entry");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-6)
      throw ValidationError(std::string("kl_divergence: ") + which + " does not sum to 1");
  };
  check(target, "target");
  check(predicted, "predicted");
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] > 0.0)
      total += target[i] * (std::log(target[i]) - std::log(std::max(predicted[i], kLogFloor)));
  }
  return total;
}

}  // namespace lcm::ad
