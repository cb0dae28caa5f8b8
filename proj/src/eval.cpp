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

#include "lcm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "lcm/encoders.hpp"
#include "lcm/error.hpp"
#include "lcm/rng.hpp"

namespace lcm::eval {

double accuracy(std::span<const std::int32_t> predictions, std::span<const std::int32_t> labels) {
  if (predictions.size() != labels.size())
    throw ValidationError("accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                          std::to_string(labels.size()) + " labels");
  if (labels.empty()) throw ValidationError("accuracy: no examples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("sample_mean: no values");
  // Exact for constant samples, so their variance is exactly zero.
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return xs.front();
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) throw ValidationError("sample_std: need at least two values");
  const double m = sample_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("regularized_incomplete_beta: continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ValidationError("regularized_incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("regularized_incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("student_t_two_sided: df must be positive");
  if (std::isnan(t)) throw ValidationError("student_t_two_sided: t is NaN");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("welch_t_test: each sample needs at least two values");
  const double ma = sample_mean(a), mb = sample_mean(b);
  const double sa = sample_std(a), sb = sample_std(b);
  const double va = sa * sa / static_cast<double>(a.size());
  const double vb = sb * sb / static_cast<double>(b.size());
  WelchResult r;
  if (va == 0.0 && vb == 0.0) {
    if (ma == mb) {
      r.identical = true;
      r.t = std::numeric_limits<double>::quiet_NaN();
      r.df = std::numeric_limits<double>::quiet_NaN();
      r.p_value = 1.0;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.df = std::numeric_limits<double>::quiet_NaN();
      r.p_value = 0.0;
    }
    return r;
  }
  const double se2 = va + vb;
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  r.p_value = student_t_two_sided(r.t, r.df);
  return r;
}

// ------------------------------------------------------------- hashing

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// ------------------------------------------------------ repeated splits

std::uint64_t split_seed(std::uint64_t base_seed, std::size_t split_index) { return base_seed + split_index; }

std::uint64_t train_seed(std::uint64_t base_seed, std::size_t split_index) {
  return derive_seed(base_seed, "train", split_index);
}

EvalResult repeated_splits_eval(const data::Dataset& dataset, const std::vector<StrategyRun>& runs,
                                const EvalOptions& options) {
  if (options.n_splits < 2) throw ValidationError("repeated_splits_eval: n_splits must be at least 2");
  if (runs.empty()) throw ValidationError("repeated_splits_eval: no strategies");
  for (const auto& r : runs) r.config.validate();

  const std::size_t n_splits = options.n_splits;
  std::vector<std::uint64_t> split_seeds(n_splits);
  std::vector<std::string> digests(n_splits);
  for (std::size_t i = 0; i < n_splits; ++i) {
    split_seeds[i] = split_seed(options.base_seed, i);
    auto test_idx = data::split_test_indices(dataset.size(), options.train_fraction, split_seeds[i]);
    std::string joined;
    for (std::size_t k : test_idx) joined += std::to_string(k) + ",";
    digests[i] = sha256_hex(joined);
  }

  const std::size_t n_tasks = runs.size() * n_splits;
  std::vector<RunRecord> records(n_tasks);
  std::vector<std::exception_ptr> errors(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      try {
        const std::size_t s = task / n_splits;
        const std::size_t i = task % n_splits;
        auto [train_set, test_set] = data::split_dataset(dataset, options.train_fraction, split_seeds[i]);
        train::TrainConfig cfg = runs[s].config;
        cfg.seed = train_seed(options.base_seed, i);
        std::optional<train::TrainState> start;
        if (options.make_start) start = options.make_start(train_set, cfg);
        auto result = train::train_run(train_set, test_set, cfg, std::move(start));
        RunRecord& rec = records[task];
        rec.strategy_index = s;
        rec.split_index = i;
        rec.split_seed = split_seeds[i];
        rec.train_seed = cfg.seed;
        rec.test_accuracy = result.history.back().test_acc;
        rec.history = std::move(result.history);
        rec.model = std::move(result.state.model);
      } catch (...) {
        errors[task] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, n_tasks));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  EvalResult out;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    SplitReport rep;
    rep.strategy = runs[s].name;
    rep.split_seeds = split_seeds;
    rep.split_digests = digests;
    for (std::size_t i = 0; i < n_splits; ++i) rep.accuracies.push_back(records[s * n_splits + i].test_accuracy);
    rep.mean = sample_mean(rep.accuracies);
    rep.std = sample_std(rep.accuracies);
    if (s > 0) rep.vs_baseline = Comparison{runs[0].name, welch_t_test(rep.accuracies, out.reports[0].accuracies)};
    out.reports.push_back(std::move(rep));
  }
  out.runs = std::move(records);
  return out;
}

// ------------------------------------------------------------ similarity

SimilarityMatrix label_similarity_matrix(const ad::Tensor& label_reps, const std::vector<std::string>& label_names) {
  if (label_reps.rank() != 2) throw ShapeError("label_similarity_matrix: expected a C x d matrix");
  const std::size_t c = label_reps.rows();
  if (label_names.size() != c)
    throw ValidationError("label_similarity_matrix: " + std::to_string(label_names.size()) + " names for " +
                          std::to_string(c) + " rows");
  std::vector<double> norms(c);
  for (std::size_t k = 0; k < c; ++k) {
    double ss = 0.0;
    for (double x : label_reps.row(k)) ss += x * x;
    norms[k] = std::sqrt(ss);
    if (norms[k] == 0.0) throw ValidationError("label_similarity_matrix: label '" + label_names[k] + "' has a zero representation");
  }
  SimilarityMatrix sim{ad::Tensor(ad::Shape{c, c}), label_names};
  for (std::size_t j = 0; j < c; ++j) {
    sim.values.at(j, j) = 1.0;
    for (std::size_t k = j + 1; k < c; ++k) {
      double dot = 0.0;
      auto a = label_reps.row(j), b = label_reps.row(k);
      for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
      const double cosine = std::clamp(dot / (norms[j] * norms[k]), -1.0, 1.0);
      sim.values.at(j, k) = sim.values.at(k, j) = cosine;
    }
  }
  return sim;
}

GroupContrast group_contrast(const SimilarityMatrix& sim, const data::GroupMap& groups) {
  data::validate_group_map(groups, sim.label_names);
  const std::size_t c = sim.label_names.size();
  double within = 0.0, between = 0.0;
  std::size_t nw = 0, nb = 0;
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t k = j + 1; k < c; ++k) {
      if (groups.at(sim.label_names[j]) == groups.at(sim.label_names[k])) {
        within += sim.values.at(j, k);
        ++nw;
      } else {
        between += sim.values.at(j, k);
        ++nb;
      }
    }
  if (nw == 0 || nb == 0) throw ValidationError("group_contrast: need both within-group and between-group pairs");
  return {within / static_cast<double>(nw), between / static_cast<double>(nb)};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string similarity_csv(const SimilarityMatrix& sim) {
  std::string out = "label";
  for (const auto& n : sim.label_names) out += "," + csv_field(n);
  out += '\n';
  for (std::size_t j = 0; j < sim.label_names.size(); ++j) {
    out += csv_field(sim.label_names[j]);
    for (std::size_t k = 0; k < sim.label_names.size(); ++k) out += "," + num(sim.values.at(j, k));
    out += '\n';
  }
  return out;
}

std::string per_split_csv(const std::vector<SplitReport>& reports) {
  std::string out = "strategy,split_index,seed,test_accuracy\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.accuracies.size(); ++i)
      out += csv_field(r.strategy) + "," + std::to_string(i) + "," + std::to_string(r.split_seeds[i]) + "," +
             num(r.accuracies[i]) + "\n";
  return out;
}

std::string summary_csv(const std::vector<SplitReport>& reports) {
  std::string out = "strategy,mean,std,p_vs_baseline\n";
  for (const auto& r : reports) {
    std::string p;
    if (r.vs_baseline) p = r.vs_baseline->test.identical ? "identical" : num(r.vs_baseline->test.p_value);
    out += csv_field(r.strategy) + "," + num(r.mean) + "," + num(r.std) + "," + p + "\n";
  }
  return out;
}

}  // namespace lcm::eval
