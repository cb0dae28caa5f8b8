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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "lcm/autodiff.hpp"
#include "lcm/data.hpp"
#include "lcm/error.hpp"
#include "lcm/eval.hpp"
#include "lcm/experiment.hpp"
#include "lcm/rng.hpp"
#include "lcm/targets.hpp"

namespace py = pybind11;
using namespace lcm;

namespace {

py::dict welch(const std::vector<double>& a, const std::vector<double>& b) {
  const auto r = eval::welch_t_test(a, b);
  py::dict out;
  out["t"] = r.t;
  out["df"] = r.df;
  out["p_value"] = r.p_value;
  out["identical"] = r.identical;
  return out;
}

data::ConfusionSpec spec_of(std::size_t classes, std::size_t words_per_class, double overlap,
                            std::size_t samples_per_class, std::size_t doc_length, std::uint64_t seed) {
  return data::paired_spec(classes, words_per_class, overlap, samples_per_class, doc_length, seed);
}

py::list generate_corpus(std::size_t classes, std::size_t words_per_class, double overlap,
                         std::size_t samples_per_class, std::size_t doc_length, std::uint64_t seed) {
  const auto spec = spec_of(classes, words_per_class, overlap, samples_per_class, doc_length, seed);
  py::list out;
  for (const auto& r : data::to_records(data::generate_confused_corpus(spec), data::generator_vocab(spec))) {
    py::dict rec;
    rec["text"] = r.text;
    rec["label"] = r.label;
    out.append(rec);
  }
  return out;
}

// Config and result travel as JSON text; the Python wrapper converts.
std::string run_experiment_json(const std::string& config_text, const std::string& base_dir, bool write) {
  auto cfg = exp::config_from_json(nlohmann::json::parse(config_text), base_dir);
  cfg.validate();
  exp::ExperimentResult result;
  {
    py::gil_scoped_release release;
    const auto data = exp::prepare_data(cfg);
    result = exp::run_experiment(cfg, data);
    if (write) exp::write_reports(cfg, data, result);
  }
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : result.eval.reports) {
    nlohmann::json j = {{"strategy", r.strategy}, {"accuracies", r.accuracies}, {"mean", r.mean}, {"std", r.std}};
    if (r.vs_baseline) j["p_vs_baseline"] = r.vs_baseline->test.identical ? 1.0 : r.vs_baseline->test.p_value;
    reports.push_back(j);
  }
  return nlohmann::json{{"reports", reports}, {"manifest", result.manifest}}.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Label confusion training lab: targets, statistics, generator and experiments.";

  // Translators are tried newest first, so the subclass goes last.
  py::register_exception<Error>(m, "LcmError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("softmax", [](const std::vector<double>& z) { return ad::softmax(z); }, py::arg("logits"));
  m.def("kl_divergence", [](const std::vector<double>& p, const std::vector<double>& q) {
    return ad::kl_divergence(p, q);
  }, py::arg("target"), py::arg("predicted"));
  m.def("one_hot", [](std::int64_t k, std::size_t c) { return targets::one_hot_target(k, c).values; },
        py::arg("class_id"), py::arg("num_classes"));
  m.def("label_smoothing", [](std::int64_t k, std::size_t c, double eps) {
    return targets::label_smoothing_target(k, c, eps).values;
  }, py::arg("class_id"), py::arg("num_classes"), py::arg("epsilon") = 0.1);
  m.def("simulated_label_distribution", [](const std::vector<double>& y, const std::vector<double>& lcd, double a) {
    return targets::simulated_label_distribution(y, lcd, a);
  }, py::arg("one_hot"), py::arg("lcd"), py::arg("alpha") = 4.0);
  m.def("canonical_strategy", [](const std::string& s) { return targets::describe(targets::parse_strategy(s)); },
        py::arg("text"));

  m.def("welch_t_test", &welch, py::arg("a"), py::arg("b"));
  m.def("derive_seed", [](std::uint64_t base, const std::string& purpose, std::uint64_t index) {
    return derive_seed(base, purpose, index);
  }, py::arg("base"), py::arg("purpose"), py::arg("index") = 0);

  m.def("pair_bayes_accuracy", [](std::size_t classes, std::size_t words_per_class, double overlap,
                                  std::size_t doc_length, std::uint64_t seed, std::size_t j, std::size_t k) {
    return data::pair_bayes_accuracy(spec_of(classes, words_per_class, overlap, 1, doc_length, seed), j, k);
  }, py::arg("classes"), py::arg("words_per_class"), py::arg("overlap"), py::arg("doc_length"), py::arg("seed"),
     py::arg("j") = 0, py::arg("k") = 1);
  m.def("generate_corpus", &generate_corpus, py::arg("classes") = 4, py::arg("words_per_class") = 50,
        py::arg("overlap") = 0.5, py::arg("samples_per_class") = 500, py::arg("doc_length") = 30,
        py::arg("seed") = 0);

  m.def("_run_experiment", &run_experiment_json, py::arg("config"), py::arg("base_dir"), py::arg("write"));
}
