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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "helpers.hpp"
#include "lcm/autodiff.hpp"
#include "lcm/error.hpp"
#include "lcm/grad_check.hpp"

using namespace lcm;
using namespace lcm::ad;
using lcm::testing::random_distribution;
using lcm::testing::random_matrix;
using lcm::testing::random_vector;

TEST_CASE("softmax reference values") {
  auto half = softmax(std::vector<double>{0.0, 0.0});
  CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(half[1] == doctest::Approx(0.5).epsilon(1e-15));

  auto p = softmax(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(std::abs(p[0] - 0.09003057) < 1e-5);
  CHECK(std::abs(p[1] - 0.24472847) < 1e-5);
  CHECK(std::abs(p[2] - 0.66524096) < 1e-5);

  auto big = softmax(std::vector<double>{1000.0, 0.0});
  CHECK(std::isfinite(big[0]));
  CHECK(std::abs(big[0] - 1.0) < 1e-12);
  CHECK(big[1] >= 0.0);
  CHECK(big[1] < 1e-300);
}

TEST_CASE("softmax rejects empty and non-finite input") {
  CHECK_THROWS_AS(softmax(std::vector<double>{}), ValidationError);
  CHECK_THROWS(softmax(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}));
  CHECK_THROWS(softmax(std::vector<double>{std::numeric_limits<double>::infinity(), 0.0}));
}

TEST_CASE("softmax sums to one and ignores constant shifts") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> z(n), shifted(n);
    const double c = rng.uniform(-50.0, 50.0);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = rng.uniform(-10.0, 10.0);
      shifted[i] = z[i] + c;
    }
    auto a = softmax(z);
    auto b = softmax(shifted);
    double total = std::accumulate(a.begin(), a.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(a[i] > 0.0);
      CHECK(std::abs(a[i] - b[i]) < 1e-12);
    }
  }
}

TEST_CASE("kl divergence reference values") {
  CHECK(std::abs(kl_divergence(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}) - std::log(2.0)) <
        1e-9);
  std::vector<double> p{0.2, 0.3, 0.5};
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));
  const double clamped = kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{0.0, 1.0});
  CHECK(std::isfinite(clamped));
  CHECK(clamped > 10.0);
  CHECK_THROWS_AS(kl_divergence(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), Error);
  CHECK_THROWS(kl_divergence(std::vector<double>{0.7, 0.7}, std::vector<double>{0.5, 0.5}));
}

TEST_CASE("kl divergence is nonnegative and zero only for equal arguments") {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    auto p = random_distribution(n, rng);
    auto q = random_distribution(n, rng);
    const double d = kl_divergence(p, q);
    CHECK(d >= -1e-12);
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(p[i] - q[i]));
    if (gap > 1e-9) CHECK(d > 1e-12);
    CHECK(std::abs(kl_divergence(p, p)) < 1e-12);
  }
}

TEST_CASE("primitive examples") {
  Tape tape;
  Rng rng(3);
  auto a = random_matrix(3, 4, rng);
  auto eye = Tensor::matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Var prod = matmul(tape.constant(eye), tape.constant(a));
  CHECK(prod.value() == a);

  Var m = mean(tape.constant(Tensor::matrix(2, 2, {1, 3, 5, 7})), 1);
  REQUIRE(m.value().shape() == Shape{2});
  CHECK(m.value()[0] == 2.0);
  CHECK(m.value()[1] == 6.0);

  Var col = mean(tape.constant(Tensor::matrix(2, 2, {1, 3, 5, 7})), 0);
  CHECK(col.value()[0] == 3.0);
  CHECK(col.value()[1] == 5.0);

  Var bag = embedding_bag(tape.constant(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6})), {0, 2, 1}, {0, 2, 3});
  CHECK(bag.value() == Tensor::matrix(2, 2, {3, 4, 3, 4}));
}

TEST_CASE("shape mismatch names the primitive and the shapes") {
  Tape tape;
  Var x = tape.constant(Tensor(Shape{2, 3}));
  Var y = tape.constant(Tensor(Shape{2, 3}));
  try {
    matmul(x, y);
    FAIL("matmul of 2x3 by 2x3 accepted");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("2x3") != std::string::npos);
  }
  CHECK_THROWS_AS(add(x, tape.constant(Tensor(Shape{3, 2}))), ShapeError);
  CHECK_THROWS_AS(add_bias(x, tape.constant(Tensor(Shape{2}))), ShapeError);
}

TEST_CASE("primitives are reachable by name") {
  for (Prim p : {Prim::kMatMul, Prim::kTanh, Prim::kSoftmax, Prim::kKlDiv, Prim::kEmbeddingBag}) {
    CHECK(prim_from_name(prim_name(p)) == p);
  }
  CHECK_THROWS(prim_from_name("conv2d"));
  Tape tape;
  Var x = tape.constant(Tensor::vector({0.0, 1.0}));
  Var viaName = tape.apply("tanh", std::vector<Var>{x});
  CHECK(viaName.value()[1] == std::tanh(1.0));
}

TEST_CASE("backprop examples") {
  {
    Tape tape;
    Var w = tape.parameter("w", Tensor::scalar(3.0));
    auto g = tape.backprop(mul(w, w));
    CHECK(g.at("w").item() == 6.0);
  }
  {
    // d/dz KL(t || softmax(z)) = softmax(z) - t for a constant target.
    Tape tape;
    auto z = Tensor::matrix(1, 3, {0.3, -1.2, 2.0});
    auto t = Tensor::matrix(1, 3, {0.1, 0.6, 0.3});
    Var zv = tape.parameter("z", z);
    Var probs = softmax(zv);
    auto g = tape.backprop(kl_div(tape.constant(t), probs));
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(g.at("z")[j] - (probs.value()[j] - t[j])) < 1e-12);
  }
  {
    Tape tape;
    Var used = tape.parameter("used", Tensor::vector({1.0, 2.0}));
    tape.parameter("unused", Tensor(Shape{2, 3}));
    auto g = tape.backprop(sum(used));
    REQUIRE(g.count("unused") == 1);
    CHECK(g.at("unused").shape() == Shape{2, 3});
    for (double v : g.at("unused").data()) CHECK(v == 0.0);
  }
  {
    Tape tape;
    Var v = tape.parameter("v", Tensor::vector({1.0, 2.0}));
    CHECK_THROWS_AS(tape.backprop(tanh(v)), ShapeError);
  }
}

TEST_CASE("detach stops gradients") {
  Tape tape;
  Var w = tape.parameter("w", Tensor::scalar(2.0));
  Var frozen = tape.detach(mul(w, w));
  auto g = tape.backprop(add(mul(frozen, w), w));
  CHECK(g.at("w").item() == doctest::Approx(5.0));
}

TEST_CASE("tape replay reproduces every value bit for bit") {
  Rng rng(21);
  Tape tape;
  Var x = tape.parameter("x", random_matrix(4, 3, rng));
  Var w = tape.parameter("w", random_matrix(3, 5, rng));
  Var b = tape.parameter("b", random_vector(5, rng));
  Var p = softmax(add_bias(tanh(matmul(x, w)), b));
  Var target = tape.constant(Tensor::matrix(4, 5, std::vector<double>(20, 0.2)));
  Var loss = kl_div(target, p);
  std::vector<Tensor> before;
  for (std::size_t i = 0; i < tape.size(); ++i) before.push_back(tape.node(i).value);
  tape.replay();
  for (std::size_t i = 0; i < tape.size(); ++i) CHECK(tape.node(i).value == before[i]);
  CHECK(tape.value(loss).all_finite());
}

TEST_CASE("grad_check on a quadratic") {
  TensorMap params{{"w", Tensor::vector({0.5, -1.5, 2.0})}};
  auto build = [](Tape&, const Bindings& b) {
    Var w = b.at("w");
    return sum(mul(w, w));
  };
  CHECK(grad_check(build, params, 1e-5) < 1e-8);
  CHECK_THROWS_AS(grad_check(build, params, 1.0), ValidationError);
  CHECK_THROWS_AS(grad_check(build, params, 1e-9), ValidationError);
}

TEST_CASE("grad_check rejects a non-deterministic builder") {
  TensorMap params{{"w", Tensor::vector({0.5})}};
  int calls = 0;
  auto build = [&calls](Tape& tape, const Bindings& b) {
    ++calls;
    return sum(add(b.at("w"), tape.constant(Tensor::vector({static_cast<double>(calls)}))));
  };
  CHECK_THROWS_AS(grad_check(build, params, 1e-5), ValidationError);
}

TEST_CASE("every primitive passes grad_check on random instances") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const std::size_t b = 2 + rng.below(3), d = 2 + rng.below(4), c = 2 + rng.below(3), v = 6;
    TensorMap params{{"x", random_matrix(b, d, rng)},
                     {"w", random_matrix(d, c, rng)},
                     {"bias", random_vector(c, rng)},
                     {"emb", random_matrix(v, d, rng)},
                     {"m", random_matrix(b, c, rng)},
                     {"t_logits", random_matrix(b, c, rng)}};
    std::vector<std::size_t> ids, offsets{0};
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t len = 1 + rng.below(4);
      for (std::size_t k = 0; k < len; ++k) ids.push_back(rng.below(v));
      offsets.push_back(ids.size());
    }
    std::vector<std::size_t> rows{rng.below(v), rng.below(v)};
    auto build = [&](Tape&, const Bindings& p) {
      Var pooled = embedding_bag(p.at("emb"), ids, offsets);
      Var h = tanh(add(p.at("x"), scale(pooled, 0.7)));
      Var logits = add_bias(matmul(h, p.at("w")), p.at("bias"));
      Var mixed = sub(mul(logits, p.at("m")), transpose(transpose(p.at("m"))));
      Var pred = softmax(mixed);
      Var target = softmax(p.at("t_logits"));
      Var extra = mean(mean(log(pred), 1), 0);
      Var g = sum(gather(p.at("emb"), rows));
      return add(add(kl_div(target, pred), scale(extra, 0.1)), scale(g, 0.01));
    };
    const double err = grad_check(build, params, 1e-6);
    CHECK_MESSAGE(err < 1e-4, "seed " << seed << " error " << err);
  }
}
