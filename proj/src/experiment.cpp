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

#include "lcm/experiment.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "lcm/encoders.hpp"
#include "lcm/error.hpp"
#include "lcm/rng.hpp"

namespace lcm::exp {
namespace {

using nlohmann::json;

// Typed access to one JSON object that remembers which keys were consumed.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ValidationError(where_ + ": expected a JSON object");
  }

  const json* find(const std::string& key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void uint(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
        throw type_error(key, "a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void uint64(const std::string& key, std::uint64_t& out) {
    std::size_t tmp = out;
    uint(key, tmp);
    out = tmp;
  }
  void real(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw type_error(key, "a number");
      out = v->get<double>();
    }
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw type_error(key, "an integer");
      out = v->get<int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw type_error(key, "true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw type_error(key, "a string");
      out = v->get<std::string>();
    }
  }
  void path(const std::string& key, std::optional<std::filesystem::path>& out,
            const std::filesystem::path& base) {
    if (const json* v = find(key)) {
      if (v->is_null()) return;
      if (!v->is_string()) throw type_error(key, "a path string");
      std::filesystem::path p = v->get<std::string>();
      out = (p.is_relative() && !base.empty()) ? base / p : p;
    }
  }

  const std::string& where() const { return where_; }

  void finish() const {
    for (const auto& item : obj_.items())
      if (!seen_.count(item.key())) throw ValidationError(where_ + ": unknown key \"" + item.key() + "\"");
  }

 private:
  ValidationError type_error(const std::string& key, const char* expected) const {
    return ValidationError(where_ + "." + key + ": expected " + expected);
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

StrategySpec strategy_from_json(const json& doc, std::size_t index) {
  const std::string where = "strategies[" + std::to_string(index) + "]";
  if (doc.is_string()) return make_strategy(targets::parse_strategy(doc.get<std::string>()));
  Fields f(doc, where);
  std::string kind, name;
  f.string("kind", kind);
  f.string("name", name);
  targets::TargetStrategy strategy;
  if (kind == "one-hot") {
    strategy = targets::OneHot{};
  } else if (kind == "ls") {
    targets::LabelSmoothing s;
    f.real("epsilon", s.epsilon);
    strategy = s;
  } else if (kind == "lcm") {
    targets::Lcm s;
    f.real("alpha", s.alpha);
    if (const json* v = f.find("stop_epoch"); v && !v->is_null()) {
      if (!v->is_number_integer()) throw ValidationError(where + ".stop_epoch: expected an integer");
      s.stop_epoch = v->get<int>();
    }
    f.boolean("detach_target", s.detach_target);
    strategy = s;
  } else {
    throw ValidationError(where + ".kind: expected \"one-hot\", \"ls\" or \"lcm\", got \"" + kind + "\"");
  }
  f.finish();
  targets::validate(strategy);
  StrategySpec spec = make_strategy(strategy);
  if (!name.empty()) spec.name = name;
  return spec;
}

json strategy_to_json(const StrategySpec& spec) {
  json out = {{"name", spec.name}};
  if (std::holds_alternative<targets::OneHot>(spec.strategy)) {
    out["kind"] = "one-hot";
  } else if (const auto* ls = std::get_if<targets::LabelSmoothing>(&spec.strategy)) {
    out["kind"] = "ls";
    out["epsilon"] = ls->epsilon;
  } else {
    const auto& lcm = std::get<targets::Lcm>(spec.strategy);
    out["kind"] = "lcm";
    out["alpha"] = lcm.alpha;
    out["stop_epoch"] = lcm.stop_epoch ? json(*lcm.stop_epoch) : json(nullptr);
    out["detach_target"] = lcm.detach_target;
  }
  return out;
}

json path_json(const std::optional<std::filesystem::path>& p) {
  return p ? json(p->string()) : json(nullptr);
}

json input_entry(const std::filesystem::path& p) {
  return {{"path", p.string()}, {"sha256", eval::file_sha256(p)}};
}

}  // namespace

std::vector<StrategySpec> default_strategies() {
  return {make_strategy(targets::OneHot{}), make_strategy(targets::LabelSmoothing{0.1}),
          make_strategy(targets::Lcm{})};
}

StrategySpec make_strategy(targets::TargetStrategy strategy) {
  return {targets::describe(strategy), strategy};
}

void ExperimentConfig::validate() const {
  if (dataset.path.has_value() == dataset.generator.has_value())
    throw ValidationError("config: dataset needs exactly one of \"path\" and \"generator\"");
  if (const auto& g = dataset.generator) {
    if (g->classes < 2) throw ValidationError("config: generator.classes must be at least 2");
    if (g->words_per_class < 1) throw ValidationError("config: generator.words_per_class must be positive");
    if (!(g->overlap >= 0.0 && g->overlap <= 1.0))
      throw ValidationError("config: generator.overlap must lie in [0, 1]");
    if (g->samples_per_class < 1) throw ValidationError("config: generator.samples_per_class must be positive");
    if (g->doc_length < 1) throw ValidationError("config: generator.doc_length must be positive");
  }
  if (dataset.min_freq < 1) throw ValidationError("config: dataset.min_freq must be positive");
  if (dataset.max_vocab < 1) throw ValidationError("config: dataset.max_vocab must be positive");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw ValidationError("config: noise_rate must lie in [0, 1]");
  if (noise_rate > 0.0 && !dataset.groups && !dataset.generator)
    throw ValidationError("config: noise_rate > 0 needs dataset.groups");
  if (strategies.empty()) throw ValidationError("config: at least one strategy is required");
  std::set<std::string> names;
  for (const auto& s : strategies) {
    targets::validate(s.strategy);
    if (s.name.empty()) throw ValidationError("config: strategy names must be nonempty");
    if (!names.insert(slug(s.name)).second)
      throw ValidationError("config: duplicate strategy name \"" + s.name + "\"");
  }
  train.validate();
  if (n_splits < 2) throw ValidationError("config: n_splits must be at least 2");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("config: train_fraction must lie in (0, 1)");
  if (jobs < 1) throw ValidationError("config: jobs must be positive");
  if (out.empty()) throw ValidationError("config: out must be a directory path");
}

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  Fields top(doc, "config");
  if (const json* d = top.find("dataset")) {
    Fields f(*d, "config.dataset");
    f.path("path", cfg.dataset.path, base_dir);
    f.path("groups", cfg.dataset.groups, base_dir);
    f.path("embeddings", cfg.dataset.embeddings, base_dir);
    f.uint("min_freq", cfg.dataset.min_freq);
    f.uint("max_vocab", cfg.dataset.max_vocab);
    if (const json* g = f.find("generator"); g && !g->is_null()) {
      GeneratorConfig gen;
      Fields gf(*g, "config.dataset.generator");
      gf.uint("classes", gen.classes);
      gf.uint("words_per_class", gen.words_per_class);
      gf.real("overlap", gen.overlap);
      gf.uint("samples_per_class", gen.samples_per_class);
      gf.uint("doc_length", gen.doc_length);
      if (const json* s = gf.find("seed"); s && !s->is_null()) {
        if (!s->is_number_unsigned()) throw ValidationError("config.dataset.generator.seed: expected a non-negative integer");
        gen.seed = s->get<std::uint64_t>();
      }
      gf.finish();
      cfg.dataset.generator = gen;
    }
    f.finish();
  }
  top.real("noise_rate", cfg.noise_rate);
  if (const json* s = top.find("strategies")) {
    if (!s->is_array()) throw ValidationError("config.strategies: expected an array");
    for (std::size_t i = 0; i < s->size(); ++i) cfg.strategies.push_back(strategy_from_json((*s)[i], i));
  } else {
    cfg.strategies = default_strategies();
  }
  if (const json* t = top.find("train")) {
    Fields f(*t, "config.train");
    f.real("learning_rate", cfg.train.learning_rate);
    f.uint("batch_size", cfg.train.batch_size);
    f.integer("epochs", cfg.train.epochs);
    f.uint("dim", cfg.train.dim);
    f.uint("max_len", cfg.train.max_len);
    f.real("beta1", cfg.train.beta1);
    f.real("beta2", cfg.train.beta2);
    f.real("adam_epsilon", cfg.train.adam_epsilon);
    f.finish();
  }
  top.uint("n_splits", cfg.n_splits);
  top.real("train_fraction", cfg.train_fraction);
  top.uint64("seed", cfg.seed);
  std::optional<std::filesystem::path> out;
  top.path("out", out, base_dir);
  if (out) cfg.out = *out;
  top.uint("jobs", cfg.jobs);
  top.finish();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json dataset = {{"path", path_json(cfg.dataset.path)},
                  {"groups", path_json(cfg.dataset.groups)},
                  {"embeddings", path_json(cfg.dataset.embeddings)},
                  {"min_freq", cfg.dataset.min_freq},
                  {"max_vocab", cfg.dataset.max_vocab},
                  {"generator", nullptr}};
  if (const auto& g = cfg.dataset.generator) {
    dataset["generator"] = {{"classes", g->classes},
                            {"words_per_class", g->words_per_class},
                            {"overlap", g->overlap},
                            {"samples_per_class", g->samples_per_class},
                            {"doc_length", g->doc_length},
                            {"seed", g->seed ? json(*g->seed) : json(nullptr)}};
  }
  json strategies = json::array();
  for (const auto& s : cfg.strategies) strategies.push_back(strategy_to_json(s));
  const auto& t = cfg.train;
  return {{"dataset", dataset},
          {"noise_rate", cfg.noise_rate},
          {"strategies", strategies},
          {"train",
           {{"learning_rate", t.learning_rate},
            {"batch_size", t.batch_size},
            {"epochs", t.epochs},
            {"dim", t.dim},
            {"max_len", t.max_len},
            {"beta1", t.beta1},
            {"beta2", t.beta2},
            {"adam_epsilon", t.adam_epsilon}}},
          {"n_splits", cfg.n_splits},
          {"train_fraction", cfg.train_fraction},
          {"seed", cfg.seed},
          {"out", cfg.out.string()},
          {"jobs", cfg.jobs}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json(path), path.parent_path());
}

data::ConfusionSpec confusion_spec(const GeneratorConfig& gen, std::uint64_t experiment_seed) {
  const std::uint64_t seed = gen.seed ? *gen.seed : derive_seed(experiment_seed, "generator");
  return data::paired_spec(gen.classes, gen.words_per_class, gen.overlap, gen.samples_per_class, gen.doc_length,
                           seed);
}

ResolvedSeeds resolve_seeds(const ExperimentConfig& cfg) {
  ResolvedSeeds s;
  if (cfg.dataset.generator) s.generator = confusion_spec(*cfg.dataset.generator, cfg.seed).seed;
  s.noise = derive_seed(cfg.seed, "noise");
  s.embeddings = derive_seed(cfg.seed, "embeddings");
  for (std::size_t i = 0; i < cfg.n_splits; ++i) {
    s.splits.push_back(eval::split_seed(cfg.seed, i));
    s.train.push_back(eval::train_seed(cfg.seed, i));
  }
  return s;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  for (const auto* p : {&cfg.dataset.path, &cfg.dataset.groups, &cfg.dataset.embeddings})
    if (*p && !std::filesystem::is_regular_file(**p))
      throw ValidationError("config: input file " + (*p)->string() + " does not exist");
  const ResolvedSeeds seeds = resolve_seeds(cfg);
  PreparedData out;
  if (const auto& g = cfg.dataset.generator) {
    const auto spec = confusion_spec(*g, cfg.seed);
    out.dataset = data::generate_confused_corpus(spec);
    out.vocab = data::generator_vocab(spec);
    out.groups = data::generator_groups(spec);
  } else {
    const auto& path = *cfg.dataset.path;
    const auto records = data::read_jsonl(path);
    out.inputs["dataset"] = input_entry(path);
    const auto names = data::label_names_of(records);
    if (records.empty()) throw ValidationError("dataset " + path.string() + " is empty");
    if (!records.front().is_vector) {
      std::vector<std::string> texts;
      texts.reserve(records.size());
      for (const auto& r : records) texts.push_back(r.text);
      out.vocab = data::build_vocab(texts, cfg.dataset.min_freq, cfg.dataset.max_vocab);
    }
    out.dataset = data::encode_corpus(records, out.vocab, names, cfg.train.max_len);
  }
  if (const auto& gp = cfg.dataset.groups) {
    out.groups = data::read_group_map(*gp);
    out.inputs["groups"] = input_entry(*gp);
  }
  if (out.groups) data::validate_group_map(*out.groups, out.dataset.label_names);
  if (cfg.noise_rate > 0.0) {
    out.dataset = data::inject_label_noise(out.dataset, *out.groups, cfg.noise_rate, seeds.noise, &out.noise);
  }
  if (const auto& ep = cfg.dataset.embeddings) {
    if (out.dataset.vocab_size == 0) throw ValidationError("config: embeddings need a text corpus");
    auto load = data::load_pretrained_embeddings(*ep, out.vocab, cfg.train.dim, seeds.embeddings);
    out.embeddings = std::move(load.table);
    out.inputs["embeddings"] = input_entry(*ep);
    out.inputs["embeddings"]["coverage"] = load.coverage;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const PreparedData& data) {
  cfg.validate();
  std::vector<eval::StrategyRun> runs;
  for (const auto& s : cfg.strategies) {
    train::TrainConfig tc = cfg.train;
    tc.strategy = s.strategy;
    runs.push_back({s.name, tc});
  }
  eval::EvalOptions opts;
  opts.n_splits = cfg.n_splits;
  opts.base_seed = cfg.seed;
  opts.train_fraction = cfg.train_fraction;
  opts.jobs = cfg.jobs;
  if (data.embeddings) {
    const ad::Tensor table = *data.embeddings;
    opts.make_start = [table](const data::Dataset& train_set, const train::TrainConfig& tc) {
      auto state = train::initial_state(train_set, tc);
      state.model.predictor.text.embedding = table;
      return state;
    };
  }
  ExperimentResult result;
  result.eval = eval::repeated_splits_eval(data.dataset, runs, opts);

  const ResolvedSeeds seeds = resolve_seeds(cfg);
  json splits = json::array();
  for (std::size_t i = 0; i < cfg.n_splits; ++i) {
    splits.push_back({{"index", i},
                      {"seed", seeds.splits[i]},
                      {"train_seed", seeds.train[i]},
                      {"test_sha256", result.eval.reports.front().split_digests[i]}});
  }
  json strategies = json::array();
  for (const auto& s : cfg.strategies) strategies.push_back(strategy_to_json(s));
  const auto& ds = data.dataset;
  result.manifest = {
      {"config", config_to_json(cfg)},
      {"seeds",
       {{"experiment", cfg.seed},
        {"generator", seeds.generator ? json(*seeds.generator) : json(nullptr)},
        {"noise", seeds.noise},
        {"embeddings", seeds.embeddings}}},
      {"splits", splits},
      {"inputs", data.inputs},
      {"dataset",
       {{"examples", ds.size()},
        {"classes", ds.num_classes()},
        {"label_names", ds.label_names},
        {"vocab_size", ds.vocab_size},
        {"feature_dim", ds.feature_dim()},
        {"provenance", ds.provenance}}},
      {"noise", {{"rate", cfg.noise_rate}, {"eligible", data.noise.eligible}, {"flipped", data.noise.flipped}}},
      {"strategies", strategies},
  };
  return result;
}

std::string slug(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const auto u = static_cast<unsigned char>(ch);
    out += (std::isalnum(u) || ch == '.' || ch == '-') ? ch : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

void write_reports(const ExperimentConfig& cfg, const PreparedData& data, const ExperimentResult& result) {
  const auto& out = cfg.out;
  for (const auto& run : result.eval.runs) {
    const std::string dir = slug(cfg.strategies.at(run.strategy_index).name);
    const std::string file = "split_" + std::to_string(run.split_index) + ".csv";
    write_text(out / "histories" / dir / file, train::history_csv(run.history));
    if (run.model.lcm) {
      const auto reps = enc::encode_labels(data.dataset.num_classes(), run.model.lcm->label);
      const auto sim = eval::label_similarity_matrix(reps, data.dataset.label_names);
      write_text(out / "labelsim" / dir / file, eval::similarity_csv(sim));
    }
  }
  write_text(out / "per_split.csv", eval::per_split_csv(result.eval.reports));
  write_json(out / "manifest.json", result.manifest);
  write_text(out / "summary.csv", eval::summary_csv(result.eval.reports));
}

json vocab_to_json(const data::Vocab& vocab) {
  return {{"min_freq", vocab.min_freq()}, {"tokens", vocab.tokens()}};
}

data::Vocab vocab_from_json(const json& doc) {
  Fields f(doc, "vocab");
  std::size_t min_freq = 1;
  f.uint("min_freq", min_freq);
  const json* tokens = f.find("tokens");
  if (!tokens || !tokens->is_array()) throw FormatError("vocab: \"tokens\" must be an array of strings");
  f.finish();
  std::vector<std::string> list;
  for (const auto& t : *tokens) {
    if (!t.is_string()) throw FormatError("vocab: \"tokens\" must be an array of strings");
    list.push_back(t.get<std::string>());
  }
  return data::Vocab(std::move(list), min_freq);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace lcm::exp
