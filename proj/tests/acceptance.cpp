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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lcm/data.hpp"
#include "lcm/error.hpp"
#include "lcm/encoders.hpp"
#include "lcm/eval.hpp"
#include "lcm/experiment.hpp"
#include "lcm/grad_check.hpp"
#include "lcm/targets.hpp"
#include "lcm/train.hpp"
#include "lcm_loss.hpp"

using namespace lcm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shared setup of the synthetic trend experiments.
constexpr std::uint64_t kSeed = 2026;

exp::ExperimentConfig trend_config(double overlap, double noise, std::vector<std::string> strategies) {
  exp::ExperimentConfig cfg;
  exp::GeneratorConfig gen;
  gen.classes = 4;
  gen.overlap = overlap;
  gen.samples_per_class = 500;
  gen.doc_length = 30;
  cfg.dataset.generator = gen;
  cfg.noise_rate = noise;
  for (const auto& s : strategies) cfg.strategies.push_back(exp::make_strategy(targets::parse_strategy(s)));
  cfg.train.max_len = 30;
  cfg.n_splits = 10;
  cfg.seed = kSeed;
  return cfg;
}

const eval::SplitReport& report(const exp::ExperimentResult& r, const std::string& name) {
  for (const auto& rep : r.eval.reports)
    if (rep.strategy == name) return rep;
  throw Error("no report for " + name);
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int instances = 0;
  for (std::size_t c : {3u, 5u})
    for (std::size_t d : {4u, 8u})
      for (std::uint64_t s = 0; s < 6; ++s) {
        const auto inst = testing::random_lcm_instance(c, d, 1000 * c + 10 * d + s);
        worst = std::max(worst, ad::grad_check(inst.builder(), inst.params, 1e-6));
        ++instances;
      }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 60.0,
          fmt("%d instances, max relative error %.3g, %.1f s", instances, worst, secs)};
}

Outcome oracle_values() {
  std::vector<std::string> bad;
  auto near = [&](double got, double want, double tol, const char* what) {
    if (!(std::abs(got - want) <= tol)) bad.push_back(fmt("%s=%.10g (want %.10g)", what, got, want));
  };
  auto sld = targets::simulated_label_distribution(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.5}, 4.0);
  near(sld[0], 0.98201, 1e-5, "sld[0]");
  near(sld[1], 0.01799, 1e-5, "sld[1]");
  auto sld3 =
      targets::simulated_label_distribution(std::vector<double>{1, 0, 0}, std::vector<double>{0.2, 0.5, 0.3}, 1.0);
  near(sld3[0], 0.52544, 1e-5, "sld3[0]");
  near(sld3[1], 0.26093, 1e-5, "sld3[1]");
  near(sld3[2], 0.21363, 1e-5, "sld3[2]");
  auto ls = targets::label_smoothing_target(0, 4, 0.1).values;
  near(ls[0], 0.925, 1e-12, "ls[0]");
  near(ls[3], 0.025, 1e-12, "ls[3]");
  near(ad::kl_divergence(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.5}), std::log(2.0), 1e-9, "kl");
  for (double g : {1.0, 100.0}) {
    ad::TensorMap p{{"w", ad::Tensor::scalar(0.0)}};
    train::AdamState st;
    train::adam_step(p, {{"w", ad::Tensor::scalar(g)}}, st, train::AdamConfig{});
    near(p.at("w").item(), -0.001, 1e-6, g == 1.0 ? "adam(g=1)" : "adam(g=100)");
  }
  std::string detail = "SLD, LS, KL and Adam first step";
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

Outcome sld_properties() {
  Rng rng(31);
  const int n = 1000;
  int mono = 0, limit = 0, argmax_ok = 0;
  for (int trial = 0; trial < n; ++trial) {
    const std::size_t c = 2 + rng.below(19);
    const std::size_t k = rng.below(c);
    std::vector<double> onehot(c, 0.0), lcd(c);
    onehot[k] = 1.0;
    double total = 0.0;
    for (double& x : lcd) total += (x = rng.uniform(0.001, 1.0));
    for (double& x : lcd) x /= total;

    double prev = -1.0;
    bool up = true;
    for (double a = 0.5; a <= 20.0; a += 0.5) {
      const double p = targets::simulated_label_distribution(onehot, lcd, a)[k];
      up = up && p > prev;
      prev = p;
    }
    mono += up;

    const auto far = targets::simulated_label_distribution(onehot, lcd, 50.0);
    double dev = 0.0;
    for (std::size_t j = 0; j < c; ++j) dev = std::max(dev, std::abs(far[j] - onehot[j]));
    limit += dev < 1e-6;

    const double a = rng.uniform(1.0, 10.0);
    const auto s = targets::simulated_label_distribution(onehot, lcd, a);
    bool top = true;
    for (std::size_t j = 0; j < c; ++j)
      if (j != k && !(s[j] < s[k])) top = false;
    argmax_ok += top;
  }
  return {mono == n && limit == n && argmax_ok == n,
          fmt("%d LCDs: monotone %d, alpha=50 limit %d, argmax kept %d", n, mono, limit, argmax_ok)};
}

struct TrendRuns {
  exp::ExperimentResult clean, confused, noisy;
  std::optional<data::GroupMap> groups;
  double seconds_confusion = 0.0;
};

TrendRuns run_trends() {
  TrendRuns t;
  const auto t0 = std::chrono::steady_clock::now();
  for (double overlap : {0.0, 0.8}) {
    const auto cfg = trend_config(overlap, 0.0, {"one-hot", "lcm(4)"});
    (overlap == 0.0 ? t.clean : t.confused) = exp::run_experiment(cfg, exp::prepare_data(cfg));
  }
  t.seconds_confusion = seconds_since(t0);
  const auto cfg = trend_config(0.5, 0.3, {"one-hot", "ls(0.1)", "lcm(4)"});
  const auto data = exp::prepare_data(cfg);
  t.groups = data.groups;
  t.noisy = exp::run_experiment(cfg, data);
  return t;
}

Outcome confusion_trend(const TrendRuns& t) {
  const auto& c0 = report(t.clean, "one-hot");
  const auto& l0 = report(t.clean, "lcm(4)");
  const auto& c8 = report(t.confused, "one-hot");
  const auto& l8 = report(t.confused, "lcm(4)");
  const double gain0 = 100.0 * (l0.mean - c0.mean);
  const double gain8 = 100.0 * (l8.mean - c8.mean);
  const double p8 = l8.vs_baseline->test.identical ? 1.0 : l8.vs_baseline->test.p_value;
  const bool pass = gain8 >= 1.0 && p8 < 0.1 && std::abs(gain0) <= 1.0 && t.seconds_confusion < 600.0;
  return {pass, fmt("overlap 0.8: one-hot %.4f lcm %.4f gain %+.2f pt p=%.3g; overlap 0.0: gain %+.2f pt; %.0f s",
                    c8.mean, l8.mean, gain8, p8, gain0, t.seconds_confusion)};
}

Outcome noise_trend(const TrendRuns& t) {
  const double oh = report(t.noisy, "one-hot").mean;
  const double ls = report(t.noisy, "ls(0.1)").mean;
  const double lc = report(t.noisy, "lcm(4)").mean;
  const bool pass = lc > ls && ls > oh && 100.0 * (lc - oh) >= 1.5;
  return {pass, fmt("30%% noise: one-hot %.4f ls %.4f lcm %.4f, lcm - one-hot %+.2f pt", oh, ls, lc, 100.0 * (lc - oh))};
}

Outcome label_diagnostics(const TrendRuns& t) {
  int wins = 0, total = 0;
  double within = 0.0, between = 0.0;
  const auto& names = t.noisy.manifest.at("dataset").at("label_names").get<std::vector<std::string>>();
  for (const auto& run : t.noisy.eval.runs) {
    if (!run.model.lcm) continue;
    const auto reps = enc::encode_labels(names.size(), run.model.lcm->label);
    const auto g = eval::group_contrast(eval::label_similarity_matrix(reps, names), *t.groups);
    wins += g.within > g.between;
    within += g.within;
    between += g.between;
    ++total;
  }
  return {total == 10 && wins >= 8, fmt("within > between in %d/%d splits (mean within %.3f, between %.3f)", wins,
                                        total, within / total, between / total)};
}

Outcome early_stop() {
  const int stop = 3;
  const targets::TargetStrategy strategy = targets::Lcm{4.0, stop, false};
  // Unit level: targets from epoch `stop` on are the one-hot vector.
  Rng rng(5);
  bool exact = true;
  const auto heads = LcmHeadParams{testing::random_matrix(4, 4, rng), testing::random_vector(4, rng)};
  const auto label_reps = testing::random_matrix(4, 6, rng);
  const auto rep = testing::random_vector(6, rng);
  for (int epoch = 0; epoch < 8; ++epoch) {
    const auto t = targets::make_target(strategy, 2, 4, targets::LcmInputs{rep.data(), label_reps, heads}, epoch);
    const bool is_onehot = t.values == targets::one_hot_target(2, 4).values;
    if (epoch >= stop ? !is_onehot : is_onehot) exact = false;
  }

  // Trajectory level.
  auto spec = data::paired_spec(4, 20, 0.5, 40, 12, 77);
  const auto ds = data::generate_confused_corpus(spec);
  const auto [tr, te] = data::split_dataset(ds, 0.7, 77);
  train::TrainConfig cfg;
  cfg.epochs = 6;
  cfg.batch_size = 32;
  cfg.dim = 16;
  cfg.max_len = 12;
  cfg.seed = 78;
  cfg.strategy = strategy;
  std::optional<train::TrainState> checkpoint;
  std::vector<ad::TensorMap> lcm_traj, restart_traj;
  train::train_run(tr, te, cfg, std::nullopt, [&](const train::TrainState& s, const train::EpochRecord& r) {
    if (r.epoch + 1 == stop) checkpoint = s;
    if (r.epoch >= stop) lcm_traj.push_back(s.model.to_tensors());
  });
  const auto path = fs::temp_directory_path() / "lcm_acceptance_state.json";
  train::save_train_state(path, *checkpoint);
  auto one_hot = cfg;
  one_hot.strategy = targets::OneHot{};
  train::train_run(tr, te, one_hot, train::load_train_state(path),
                   [&](const train::TrainState& s, const train::EpochRecord&) { restart_traj.push_back(s.model.to_tensors()); });
  const bool same = lcm_traj == restart_traj && lcm_traj.size() == static_cast<std::size_t>(cfg.epochs - stop);
  return {exact && same, fmt("stop_epoch=%d: one-hot targets after stop %s; %zu epochs after restart %s", stop,
                             exact ? "exact" : "NOT exact", lcm_traj.size(), same ? "bit-identical" : "differ")};
}

Outcome reproducibility() {
  std::vector<std::string> files;
  const auto base = fs::temp_directory_path() / "lcm_acceptance_repro";
  fs::remove_all(base);
  for (const char* run : {"a", "b"}) {
    auto cfg = trend_config(0.5, 0.3, {"one-hot", "ls(0.1)", "lcm(4)"});
    cfg.dataset.generator->samples_per_class = 60;
    cfg.train.epochs = 3;
    cfg.n_splits = 3;
    cfg.out = base / run;
    const auto data = exp::prepare_data(cfg);
    exp::write_reports(cfg, data, exp::run_experiment(cfg, data));
  }
  int compared = 0;
  bool same = true;
  for (const auto& entry : fs::recursive_directory_iterator(base / "a")) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const auto rel = fs::relative(entry.path(), base / "a");
    same = same && slurp(entry.path()) == slurp(base / "b" / rel);
    ++compared;
  }
  return {same && compared > 0, fmt("%d CSV files compared across two runs, %s", compared,
                                     same ? "byte-identical" : "differences found")};
}

Outcome inference_independence() {
  auto spec = data::paired_spec(4, 20, 0.3, 40, 12, 91);
  const auto ds = data::generate_confused_corpus(spec);
  const auto [tr, te] = data::split_dataset(ds, 0.7, 91);
  train::TrainConfig cfg;
  cfg.epochs = 3;
  cfg.dim = 16;
  cfg.max_len = 12;
  cfg.strategy = targets::Lcm{};
  const auto result = train::train_run(tr, te, cfg);
  const auto path = fs::temp_directory_path() / "lcm_acceptance_predictor.json";
  save_checkpoint(path, predictor_tensors(result.state.model.predictor));
  const auto loaded = load_checkpoint(path);
  bool clean = true;
  for (const auto& [name, t] : loaded)
    if (name.rfind("label.", 0) == 0 || name.rfind("lcm.", 0) == 0) clean = false;
  const auto pred = enc::predict(predictor_from_tensors(loaded), te);
  const bool same = pred == enc::predict(result.state.model.predictor, te);
  return {clean && same, fmt("%zu tensors loaded, none label/lcm: %s; predictions %s", loaded.size(),
                             clean ? "yes" : "no", same ? "match the full model" : "differ")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report_line = [&](int n, const char* name, const std::function<Outcome()>& run) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s (%s)\n", n, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };
  report_line(1, "gradient correctness", gradient_correctness);
  report_line(2, "closed-form oracles", oracle_values);
  report_line(3, "SLD properties", sld_properties);
  std::optional<TrendRuns> trends;
  std::string trend_error;
  try {
    trends = run_trends();
  } catch (const std::exception& e) {
    trend_error = e.what();
  }
  auto with_trends = [&](Outcome (*f)(const TrendRuns&)) {
    return [&, f] {
      if (!trends) throw Error(trend_error);
      return f(*trends);
    };
  };
  report_line(4, "confusion-degree trend", with_trends(confusion_trend));
  report_line(5, "noise-robustness trend", with_trends(noise_trend));
  report_line(6, "label-representation diagnostics", with_trends(label_diagnostics));
  report_line(7, "early-stop semantics", early_stop);
  report_line(8, "reproducibility", reproducibility);
  report_line(9, "inference independence", inference_independence);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
