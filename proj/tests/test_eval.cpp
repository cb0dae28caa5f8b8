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

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "lcm/error.hpp"
#include "lcm/eval.hpp"

using namespace lcm;
using namespace lcm::eval;

namespace {

double boost_two_sided(double t, double df) {
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

// Welch statistic computed independently of the library.
WelchResult reference_welch(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::pair{m, s / static_cast<double>(x.size() - 1)};
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  const double qa = va / static_cast<double>(a.size());
  const double qb = vb / static_cast<double>(b.size());
  WelchResult r;
  r.t = (ma - mb) / std::sqrt(qa + qb);
  r.df = (qa + qb) * (qa + qb) /
         (qa * qa / static_cast<double>(a.size() - 1) + qb * qb / static_cast<double>(b.size() - 1));
  r.p_value = boost_two_sided(r.t, r.df);
  return r;
}

data::Dataset toy_corpus(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  data::Dataset ds;
  ds.label_names = {"a", "b", "c"};
  ds.vocab_size = 14;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::int32_t>(i % 3);
    std::vector<std::int32_t> ids(4);
    // mostly the class's own four tokens, sometimes any token
    for (auto& id : ids)
      id = rng.uniform() < 0.7 ? 2 + 4 * k + static_cast<std::int32_t>(rng.below(4))
                               : 2 + static_cast<std::int32_t>(rng.below(12));
    ds.examples.push_back(lcm::testing::text_example(ids, k, 4));
  }
  return ds;
}

std::vector<StrategyRun> toy_runs(std::vector<targets::TargetStrategy> strategies) {
  std::vector<StrategyRun> runs;
  for (auto& s : strategies) {
    train::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.dim = 6;
    cfg.max_len = 4;
    cfg.learning_rate = 0.01;
    cfg.strategy = s;
    runs.push_back({targets::describe(s), cfg});
  }
  return runs;
}

}  // namespace

TEST_CASE("accuracy") {
  std::vector<std::int32_t> y{0, 1, 2, 1, 0, 0, 2, 1, 1, 2};
  CHECK(accuracy(y, y) == 1.0);
  std::vector<std::int32_t> off{1, 2, 0, 0, 1, 1, 0, 0, 0, 0};
  CHECK(accuracy(off, y) == 0.0);
  auto seven = y;
  seven[0] = 2;
  seven[4] = 1;
  seven[9] = 0;
  CHECK(accuracy(seven, y) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK_THROWS(accuracy(std::vector<std::int32_t>{1}, y));
  CHECK_THROWS(accuracy(std::vector<std::int32_t>{}, std::vector<std::int32_t>{}));
}

TEST_CASE("incomplete beta against Boost") {
  CHECK(std::abs(regularized_incomplete_beta(2.0, 3.0, 0.25) - 0.26171875) < 1e-12);
  CHECK(std::abs(regularized_incomplete_beta(0.5, 0.5, 0.5) - 0.5) < 1e-12);
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(0.2, 40.0), b = rng.uniform(0.2, 40.0), x = rng.uniform();
    CHECK(std::abs(regularized_incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-10);
  }
  CHECK(regularized_incomplete_beta(3.0, 4.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(3.0, 4.0, 1.0) == 1.0);
}

TEST_CASE("Student t tails against Boost") {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform(-8.0, 8.0), df = rng.uniform(1.0, 60.0);
    CHECK(std::abs(student_t_two_sided(t, df) - boost_two_sided(t, df)) < 1e-10);
  }
  CHECK(student_t_two_sided(0.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("Welch worked example") {
  const std::vector<double> a{0.70, 0.72, 0.71}, b{0.68, 0.67, 0.69};
  const auto r = welch_t_test(a, b);
  CHECK(std::abs(r.t - 3.6742346141747673) < 1e-6);
  CHECK(std::abs(r.df - 4.0) < 1e-9);
  CHECK(std::abs(r.p_value - 0.0213116) < 1e-6);
  CHECK(std::abs(r.p_value - boost_two_sided(r.t, r.df)) < 1e-10);
  CHECK_FALSE(r.identical);
}

TEST_CASE("Welch matches an independent computation") {
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases{
      {{1, 2, 3, 4}, {2, 4, 6, 9, 11}},
      {{.5, .51, .49, .55, .52}, {.47, .48, .5}},
  };
  for (const auto& [a, b] : cases) {
    const auto r = welch_t_test(a, b);
    const auto ref = reference_welch(a, b);
    CHECK(std::abs(r.t - ref.t) < 1e-10);
    CHECK(std::abs(r.df - ref.df) < 1e-10);
    CHECK(std::abs(r.p_value - ref.p_value) < 1e-10);
  }
  CHECK(std::abs(welch_t_test(cases[0].first, cases[0].second).t + 2.22343) < 1e-5);
  CHECK(std::abs(welch_t_test(cases[0].first, cases[0].second).p_value - 0.074913) < 1e-5);
  CHECK(std::abs(welch_t_test(cases[1].first, cases[1].second).p_value - 0.065950) < 1e-5);
}

TEST_CASE("Welch properties on random samples") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(2 + rng.below(10)), b(2 + rng.below(10));
    for (double& x : a) x = rng.uniform(0.6, 0.9);
    for (double& x : b) x = rng.uniform(0.55, 0.85);
    const auto ab = welch_t_test(a, b);
    const auto ba = welch_t_test(b, a);
    CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-12));
    CHECK(std::abs(ab.p_value - ba.p_value) < 1e-12);
    CHECK(ab.p_value >= 0.0);
    CHECK(ab.p_value <= 1.0);
    const double shift = rng.uniform(-5.0, 5.0), scale = rng.uniform(0.1, 10.0);
    auto a2 = a, b2 = b;
    for (double& x : a2) x = x * scale + shift;
    for (double& x : b2) x = x * scale + shift;
    const auto moved = welch_t_test(a2, b2);
    CHECK(std::abs(moved.t - ab.t) < 1e-9 * std::max(1.0, std::abs(ab.t)));
    CHECK(std::abs(moved.p_value - ab.p_value) < 1e-9);
    CHECK(std::abs(sample_mean(a) * static_cast<double>(a.size()) -
                   [&] { double s = 0; for (double x : a) s += x; return s; }()) < 1e-12);
  }
}

TEST_CASE("Welch degenerate inputs") {
  const std::vector<double> same{0.8, 0.8, 0.8};
  const auto r = welch_t_test(same, same);
  CHECK(r.identical);
  CHECK(r.p_value == 1.0);
  const auto apart = welch_t_test(same, std::vector<double>{0.7, 0.7});
  CHECK_FALSE(apart.identical);
  CHECK(apart.p_value == 0.0);
  CHECK_THROWS(welch_t_test(std::vector<double>{1.0}, same));
}

TEST_CASE("sample moments") {
  const std::vector<double> xs{0.70, 0.72, 0.71, 0.69};
  CHECK(std::abs(sample_mean(xs) - 0.705) < 1e-12);
  CHECK(std::abs(sample_std(xs) - std::sqrt(0.0005 / 3.0)) < 1e-12);
  CHECK_THROWS(sample_std(std::vector<double>{1.0}));
}

TEST_CASE("seed conventions") {
  CHECK(split_seed(42, 0) == 42);
  CHECK(split_seed(42, 9) == 51);
  CHECK(train_seed(42, 3) == derive_seed(42, "train", 3));
  CHECK(train_seed(42, 3) != train_seed(42, 4));
}

TEST_CASE("repeated splits") {
  const auto ds = toy_corpus(90, 14);
  EvalOptions opt;
  opt.n_splits = 10;
  opt.base_seed = 5;
  const auto runs = toy_runs({targets::OneHot{}, targets::OneHot{}, targets::Lcm{}});
  const auto res = repeated_splits_eval(ds, runs, opt);
  REQUIRE(res.reports.size() == 3);
  REQUIRE(res.runs.size() == 30);
  for (const auto& r : res.reports) {
    CHECK(r.accuracies.size() == 10);
    CHECK(r.split_digests == res.reports[0].split_digests);
    for (std::size_t i = 0; i < 10; ++i) CHECK(r.split_seeds[i] == 5 + i);
    CHECK(std::abs(r.mean - sample_mean(r.accuracies)) < 1e-12);
    CHECK(std::abs(r.std - sample_std(r.accuracies)) < 1e-12);
  }
  CHECK_FALSE(res.reports[0].vs_baseline.has_value());
  // the same strategy twice sees the same splits and seeds
  CHECK(res.reports[1].accuracies == res.reports[0].accuracies);
  REQUIRE(res.reports[1].vs_baseline.has_value());
  CHECK(res.reports[1].vs_baseline->test.t == 0.0);
  CHECK(res.reports[1].vs_baseline->test.p_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.reports[2].vs_baseline->baseline == res.reports[0].strategy);
  for (const auto& run : res.runs) CHECK(run.train_seed == train_seed(5, run.split_index));

  auto threaded = opt;
  threaded.jobs = 3;
  const auto res3 = repeated_splits_eval(ds, runs, threaded);
  CHECK(per_split_csv(res3.reports) == per_split_csv(res.reports));
  CHECK(summary_csv(res3.reports) == summary_csv(res.reports));

  auto one = opt;
  one.n_splits = 1;
  CHECK_THROWS_AS(repeated_splits_eval(ds, runs, one), ValidationError);
}

TEST_CASE("label similarity") {
  Rng rng(15);
  const auto reps = lcm::testing::random_matrix(4, 5, rng);
  const auto sim = label_similarity_matrix(reps, {"a", "b", "c", "d"});
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(std::abs(sim.values.at(j, j) - 1.0) < 1e-12);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(sim.values.at(j, k) == sim.values.at(k, j));
      CHECK(std::abs(sim.values.at(j, k)) <= 1.0 + 1e-12);
    }
  }
  auto zero = reps;
  for (std::size_t k = 0; k < 5; ++k) zero.at(2, k) = 0.0;
  try {
    label_similarity_matrix(zero, {"a", "b", "c", "d"});
    FAIL("zero row accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("'c'") != std::string::npos);
  }
  CHECK_THROWS(label_similarity_matrix(reps, {"a", "b"}));
}

TEST_CASE("group contrast") {
  SimilarityMatrix sim{ad::Tensor::matrix(4, 4, {1.0, 0.9, 0.1, 0.2,  //
                                                  0.9, 1.0, 0.3, 0.4,  //
                                                  0.1, 0.3, 1.0, 0.7,  //
                                                  0.2, 0.4, 0.7, 1.0}),
                       {"a", "b", "c", "d"}};
  const auto g = group_contrast(sim, {{"a", "x"}, {"b", "x"}, {"c", "y"}, {"d", "y"}});
  CHECK(std::abs(g.within - 0.8) < 1e-12);
  CHECK(std::abs(g.between - 0.25) < 1e-12);
  CHECK_THROWS(group_contrast(sim, {{"a", "x"}, {"b", "x"}, {"c", "y"}}));
  CHECK_THROWS(group_contrast(sim, {{"a", "x"}, {"b", "x"}, {"c", "x"}, {"d", "x"}}));
}

TEST_CASE("report formats") {
  SplitReport base{"one-hot", {0.5, 0.75}, {7, 8}, {"d0", "d1"}, 0.625, 0.17677669529663687, std::nullopt};
  SplitReport other{"lcm(4)", {0.75, 1.0}, {7, 8}, {"d0", "d1"}, 0.875, 0.17677669529663687,
                    Comparison{"one-hot", WelchResult{1.0, 2.0, 0.25, false}}};
  CHECK(per_split_csv({base, other}) ==
        "strategy,split_index,seed,test_accuracy\none-hot,0,7,0.5\none-hot,1,8,0.75\n"
        "lcm(4),0,7,0.75\nlcm(4),1,8,1\n");
  CHECK(summary_csv({base, other}) ==
        "strategy,mean,std,p_vs_baseline\none-hot,0.625,0.17677669529663687,\nlcm(4),0.875,0.17677669529663687,0.25\n");
  SimilarityMatrix sim{ad::Tensor::matrix(2, 2, {1.0, 0.5, 0.5, 1.0}), {"x,y", "z"}};
  CHECK(similarity_csv(sim) == "label,\"x,y\",z\n\"x,y\",1,0.5\nz,0.5,1\n");
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
