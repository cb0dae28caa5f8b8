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

#include "lcm/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lcm/error.hpp"
#include "lcm/init.hpp"
#include "lcm/rng.hpp"

namespace lcm::data {
namespace {

using nlohmann::json;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// ------------------------------------------------------------------ Vocab

Vocab::Vocab(std::vector<std::string> tokens, std::size_t min_freq)
    : tokens_(std::move(tokens)), min_freq_(min_freq) {
  if (min_freq_ == 0) throw ValidationError("Vocab: min_freq must be positive");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, fresh] = ids_.emplace(tokens_[i], static_cast<std::int32_t>(i + 2));
    if (!fresh) throw ValidationError("Vocab: duplicate token '" + tokens_[i] + "'");
  }
}

std::int32_t Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknownId : it->second;
}

const std::string& Vocab::token(std::int32_t id) const {
  static const std::string kPad = "<pad>";
  static const std::string kUnk = "<unk>";
  if (id == kPadId) return kPad;
  if (id == kUnknownId) return kUnk;
  if (id < 0 || static_cast<std::size_t>(id) >= size())
    throw ValidationError("Vocab: id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id) - 2];
}

Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t min_freq,
                  std::size_t max_size) {
  if (corpus.empty()) throw ValidationError("build_vocab: empty corpus");
  if (min_freq == 0) throw ValidationError("build_vocab: min_freq must be positive");
  if (max_size == 0) throw ValidationError("build_vocab: max_size must be positive");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& text : corpus)
    for (auto& tok : tokenize(text)) ++freq[tok];
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : freq)
    if (n >= min_freq) ranked.emplace_back(tok, n);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, n] : ranked) tokens.push_back(tok);
  return Vocab(std::move(tokens), min_freq);
}

// ---------------------------------------------------------------- Dataset

std::size_t Dataset::feature_dim() const {
  return examples.empty() ? 0 : examples.front().features.size();
}

std::vector<std::int32_t> Dataset::labels() const {
  std::vector<std::int32_t> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(ex.label);
  return out;
}

std::vector<RawRecord> read_jsonl(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("label") || !obj["label"].is_string())
      throw FormatError(where + ": expected an object with a string \"label\"");
    RawRecord rec;
    rec.label = obj["label"].get<std::string>();
    const bool has_text = obj.contains("text");
    const bool has_features = obj.contains("features");
    if (has_text == has_features)
      throw FormatError(where + ": exactly one of \"text\" or \"features\" is required");
    try {
      if (has_text) {
        rec.text = obj["text"].get<std::string>();
      } else {
        rec.features = obj["features"].get<std::vector<double>>();
        rec.is_vector = true;
        if (rec.features.empty()) throw FormatError(where + ": empty \"features\"");
      }
      if (obj.contains("original_label"))
        rec.original_label = obj["original_label"].get<std::string>();
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<RawRecord>& records) {
  auto out = open_out(path);
  for (const auto& rec : records) {
    json obj = json::object();
    if (rec.is_vector) {
      obj["features"] = rec.features;
    } else {
      obj["text"] = rec.text;
    }
    obj["label"] = rec.label;
    if (rec.original_label) obj["original_label"] = *rec.original_label;
    out << obj.dump() << '\n';
  }
}

std::vector<std::string> label_names_of(const std::vector<RawRecord>& records) {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& rec : records)
    if (seen.insert(rec.label).second) names.push_back(rec.label);
  return names;
}

Dataset encode_corpus(const std::vector<RawRecord>& records, const Vocab& vocab,
                      const std::vector<std::string>& label_names, std::size_t max_len) {
  if (max_len == 0) throw ValidationError("encode_corpus: max_len must be positive");
  std::unordered_map<std::string, std::int32_t> label_ids;
  for (std::size_t i = 0; i < label_names.size(); ++i) {
    if (!label_ids.emplace(label_names[i], static_cast<std::int32_t>(i)).second)
      throw ValidationError("encode_corpus: duplicate label name '" + label_names[i] + "'");
  }
  auto lookup = [&](const std::string& label, std::size_t idx) {
    auto it = label_ids.find(label);
    if (it == label_ids.end())
      throw ValidationError("encode_corpus: record " + std::to_string(idx) + " has unknown label '" +
                            label + "'");
    return it->second;
  };

  Dataset ds;
  ds.label_names = label_names;
  ds.examples.reserve(records.size());
  if (records.empty() || !records.front().is_vector) ds.vocab_size = vocab.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& rec = records[i];
    if (!records.empty() && rec.is_vector != records.front().is_vector)
      throw ValidationError("encode_corpus: record " + std::to_string(i) +
                            " mixes text and vector inputs");
    Example ex;
    ex.label = lookup(rec.label, i);
    if (rec.original_label) ex.original_label = lookup(*rec.original_label, i);
    if (rec.is_vector) {
      if (rec.features.size() != records.front().features.size())
        throw ValidationError("encode_corpus: record " + std::to_string(i) +
                              " has a different feature dimension");
      ex.features = rec.features;
    } else {
      auto toks = tokenize(rec.text);
      ex.length = std::min(toks.size(), max_len);
      ex.token_ids.assign(max_len, kPadId);
      for (std::size_t t = 0; t < ex.length; ++t) ex.token_ids[t] = vocab.id(toks[t]);
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

std::vector<RawRecord> to_records(const Dataset& dataset, const Vocab& vocab) {
  std::vector<RawRecord> out;
  out.reserve(dataset.size());
  for (const auto& ex : dataset.examples) {
    RawRecord rec;
    rec.label = dataset.label_names.at(static_cast<std::size_t>(ex.label));
    if (ex.original_label)
      rec.original_label = dataset.label_names.at(static_cast<std::size_t>(*ex.original_label));
    if (ex.is_vector()) {
      rec.is_vector = true;
      rec.features = ex.features;
    } else {
      for (std::size_t t = 0; t < ex.length; ++t) {
        if (t) rec.text += ' ';
        rec.text += vocab.token(ex.token_ids[t]);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

// Seeded permutation of [0, n) and the size of its training prefix.
std::pair<std::vector<std::size_t>, std::size_t> split_permutation(std::size_t n, double train_fraction,
                                                                   std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("split_dataset: train_fraction must lie in (0, 1)");
  if (n < 2) throw ValidationError("split_dataset: need at least 2 examples");
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train == n)
    throw ValidationError("split_dataset: fraction " + std::to_string(train_fraction) + " of " +
                          std::to_string(n) + " examples leaves one side empty");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  return {std::move(perm), n_train};
}

}  // namespace

std::vector<std::size_t> split_test_indices(std::size_t n, double train_fraction,
                                            std::uint64_t seed) {
  auto [perm, n_train] = split_permutation(n, train_fraction, seed);
  return std::vector<std::size_t>(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed) {
  const std::size_t n = dataset.size();
  auto [perm, n_train] = split_permutation(n, train_fraction, seed);
  Dataset train, test;
  train.label_names = test.label_names = dataset.label_names;
  train.vocab_size = test.vocab_size = dataset.vocab_size;
  train.provenance = dataset.provenance + " | split(train, seed=" + std::to_string(seed) + ")";
  test.provenance = dataset.provenance + " | split(test, seed=" + std::to_string(seed) + ")";
  train.examples.reserve(n_train);
  test.examples.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i)
    (i < n_train ? train : test).examples.push_back(dataset.examples[perm[i]]);
  return {std::move(train), std::move(test)};
}

// ----------------------------------------------------------- label groups

GroupMap read_group_map(const std::filesystem::path& path) {
  auto in = open_in(path);
  json obj;
  try {
    in >> obj;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!obj.is_object()) throw FormatError(path.string() + ": expected a JSON object {label: group}");
  GroupMap out;
  for (auto& [label, group] : obj.items()) {
    if (!group.is_string()) throw FormatError(path.string() + ": group of '" + label + "' is not a string");
    out.emplace(label, group.get<std::string>());
  }
  return out;
}

void write_group_map(const std::filesystem::path& path, const GroupMap& groups) {
  json obj(groups);
  open_out(path) << obj.dump(2) << '\n';
}

void validate_group_map(const GroupMap& groups, const std::vector<std::string>& label_names) {
  for (const auto& name : label_names)
    if (!groups.contains(name)) throw ValidationError("group map has no entry for label '" + name + "'");
}

Dataset inject_label_noise(const Dataset& dataset, const GroupMap& groups, double rate,
                           std::uint64_t seed, NoiseReport* report) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ValidationError("inject_label_noise: rate must lie in [0, 1]");
  validate_group_map(groups, dataset.label_names);

  // Members of each label's group, in class-index order.
  const std::size_t c = dataset.num_classes();
  std::vector<std::vector<std::int32_t>> mates(c);
  bool any_group = false;
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      if (groups.at(dataset.label_names[a]) == groups.at(dataset.label_names[b]))
        mates[a].push_back(static_cast<std::int32_t>(b));
    }
    any_group = any_group || mates[a].size() >= 2;
  }
  if (rate > 0.0 && !any_group)
    throw ValidationError("inject_label_noise: no label group has two or more members");

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (mates[static_cast<std::size_t>(dataset.examples[i].label)].size() >= 2) eligible.push_back(i);
  }
  const auto n_flip = static_cast<std::size_t>(std::llround(rate * static_cast<double>(eligible.size())));

  Dataset out = dataset;
  Rng rng(seed);
  for (std::size_t k = 0; k < n_flip; ++k) {
    // Partial Fisher-Yates: eligible[0..k) are the chosen examples.
    std::swap(eligible[k], eligible[k + rng.below(eligible.size() - k)]);
    Example& ex = out.examples[eligible[k]];
    const auto& group = mates[static_cast<std::size_t>(ex.label)];
    std::vector<std::int32_t> others;
    for (std::int32_t m : group)
      if (m != ex.label) others.push_back(m);
    if (!ex.original_label) ex.original_label = ex.label;
    ex.label = others[rng.below(others.size())];
  }
  if (n_flip > 0 || rate > 0.0) {
    std::ostringstream os;
    os << " | noise(rate=" << rate << ", seed=" << seed << ", flipped=" << n_flip << "/" << eligible.size()
       << ")";
    out.provenance += os.str();
  }
  if (report) *report = NoiseReport{eligible.size(), n_flip};
  return out;
}

// -------------------------------------------------------- generator

void ConfusionSpec::validate() const {
  const std::size_t c = num_classes();
  if (c < 2) throw ValidationError("ConfusionSpec: need at least 2 classes");
  if (partner.size() != c || overlap.size() != c)
    throw ValidationError("ConfusionSpec: partner and overlap need one entry per class");
  if (samples_per_class == 0) throw ValidationError("ConfusionSpec: samples_per_class must be at least 1");
  if (doc_length == 0) throw ValidationError("ConfusionSpec: doc_length must be at least 1");
  const std::size_t v = vocab_size();
  for (std::size_t k = 0; k < c; ++k) {
    if (topics[k].size() != v || v == 0)
      throw ValidationError("ConfusionSpec: topic rows must share one nonempty vocabulary");
    double total = 0.0;
    for (double p : topics[k]) {
      if (!(p >= 0.0)) throw ValidationError("ConfusionSpec: negative topic weight");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ValidationError("ConfusionSpec: topic " + std::to_string(k) + " does not sum to 1");
    if (!(overlap[k] >= 0.0 && overlap[k] <= 1.0))
      throw ValidationError("ConfusionSpec: overlap must lie in [0, 1], got " + std::to_string(overlap[k]));
    const int p = partner[k];
    if (p < 0) continue;
    const auto pu = static_cast<std::size_t>(p);
    if (pu >= c || pu == k || partner[pu] != static_cast<int>(k))
      throw ValidationError("ConfusionSpec: partner table must be a symmetric pairing");
    if (overlap[pu] != overlap[k])
      throw ValidationError("ConfusionSpec: paired classes need equal overlap");
  }
}

std::vector<double> ConfusionSpec::class_distribution(std::size_t k) const {
  std::vector<double> dist = topics.at(k);
  const int p = partner.at(k);
  if (p < 0) return dist;
  const double half = overlap[k] / 2.0;
  const auto& other = topics[static_cast<std::size_t>(p)];
  for (std::size_t w = 0; w < dist.size(); ++w) dist[w] = (1.0 - half) * dist[w] + half * other[w];
  return dist;
}

std::vector<std::vector<double>> block_topics(std::size_t classes, std::size_t words_per_class,
                                              std::uint64_t seed) {
  if (classes == 0 || words_per_class == 0)
    throw ValidationError("block_topics: classes and words_per_class must be positive");
  Rng rng(seed);
  const std::size_t v = classes * words_per_class;
  std::vector<std::vector<double>> topics(classes, std::vector<double>(v, 0.0));
  for (std::size_t k = 0; k < classes; ++k) {
    double total = 0.0;
    for (std::size_t w = 0; w < words_per_class; ++w) {
      double x = rng.uniform(0.5, 1.5);
      topics[k][k * words_per_class + w] = x;
      total += x;
    }
    for (double& x : topics[k]) x /= total;
  }
  return topics;
}

ConfusionSpec paired_spec(std::size_t classes, std::size_t words_per_class, double overlap,
                          std::size_t samples_per_class, std::size_t doc_length, std::uint64_t seed) {
  ConfusionSpec spec;
  spec.topics = block_topics(classes, words_per_class, derive_seed(seed, "topics"));
  spec.partner.assign(classes, -1);
  spec.overlap.assign(classes, 0.0);
  for (std::size_t k = 0; k + 1 < classes; k += 2) {
    spec.partner[k] = static_cast<int>(k + 1);
    spec.partner[k + 1] = static_cast<int>(k);
    spec.overlap[k] = spec.overlap[k + 1] = overlap;
  }
  spec.samples_per_class = samples_per_class;
  spec.doc_length = doc_length;
  spec.seed = seed;
  spec.validate();
  return spec;
}

Vocab generator_vocab(const ConfusionSpec& spec) {
  std::vector<std::string> words;
  for (std::size_t w = 0; w < spec.vocab_size(); ++w) words.push_back("w" + std::to_string(w));
  return Vocab(std::move(words), 1);
}

std::vector<std::string> generator_label_names(std::size_t classes) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < classes; ++k) names.push_back("class" + std::to_string(k));
  return names;
}

GroupMap generator_groups(const ConfusionSpec& spec) {
  const auto names = generator_label_names(spec.num_classes());
  GroupMap groups;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const int p = spec.partner[k];
    const std::size_t lead = p < 0 ? k : std::min(k, static_cast<std::size_t>(p));
    groups[names[k]] = "group" + std::to_string(lead);
  }
  return groups;
}

Dataset generate_confused_corpus(const ConfusionSpec& spec) {
  spec.validate();
  const std::size_t c = spec.num_classes();
  std::vector<std::vector<double>> cdf(c);
  for (std::size_t k = 0; k < c; ++k) {
    auto dist = spec.class_distribution(k);
    std::partial_sum(dist.begin(), dist.end(), std::back_inserter(cdf[k]));
  }
  Dataset ds;
  ds.label_names = generator_label_names(c);
  ds.vocab_size = spec.vocab_size() + 2;
  std::ostringstream prov;
  prov << "generated(classes=" << c << ", vocab=" << spec.vocab_size()
       << ", samples_per_class=" << spec.samples_per_class << ", doc_length=" << spec.doc_length
       << ", seed=" << spec.seed << ")";
  ds.provenance = prov.str();
  ds.examples.reserve(c * spec.samples_per_class);
  Rng rng(spec.seed);
  for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
    for (std::size_t k = 0; k < c; ++k) {
      Example ex;
      ex.label = static_cast<std::int32_t>(k);
      ex.length = spec.doc_length;
      ex.token_ids.resize(spec.doc_length);
      const auto& row = cdf[k];
      for (auto& id : ex.token_ids) {
        const double u = rng.uniform() * row.back();
        auto it = std::upper_bound(row.begin(), row.end(), u);
        if (it == row.end()) --it;
        id = static_cast<std::int32_t>(it - row.begin()) + 2;
      }
      ds.examples.push_back(std::move(ex));
    }
  }
  return ds;
}

double pair_bayes_accuracy(const ConfusionSpec& spec, std::size_t j, std::size_t k) {
  spec.validate();
  const std::size_t c = spec.num_classes();
  if (j >= c || k >= c || j == k)
    throw ValidationError("pair_bayes_accuracy: need two distinct classes below " + std::to_string(c));
  for (std::size_t w = 0; w < spec.vocab_size(); ++w)
    if (spec.topics[j][w] > 0.0 && spec.topics[k][w] > 0.0)
      throw ValidationError("pair_bayes_accuracy: topics of classes " + std::to_string(j) + " and " +
                            std::to_string(k) + " share word " + std::to_string(w));
  const std::size_t n = spec.doc_length;
  // Accuracy on documents of class `a` against class `b`.
  auto one_side = [&](std::size_t a, std::size_t b) {
    const auto pa = spec.class_distribution(a);
    const auto pb = spec.class_distribution(b);
    double favour = 0.0, against = 0.0, neutral = 0.0, decisive = 0.0;
    double step = -1.0;
    for (std::size_t w = 0; w < pa.size(); ++w) {
      if (pa[w] == 0.0) continue;
      if (pb[w] == 0.0) {
        decisive += pa[w];
        continue;
      }
      const double llr = std::log(pa[w] / pb[w]);
      if (std::abs(llr) < 1e-12) {
        neutral += pa[w];
        continue;
      }
      if (step < 0.0) step = std::abs(llr);
      if (std::abs(std::abs(llr) - step) > 1e-9 * step)
        throw ValidationError("pair_bayes_accuracy: per-word likelihood ratios are not constant");
      (llr > 0.0 ? favour : against) += pa[w];
    }
    // Multinomial over (favour, against, neutral) with no decisive word.
    auto log_term = [](double count, double prob) {
      return count == 0.0 ? 0.0 : count * std::log(prob);
    };
    double win = 0.0;
    for (std::size_t f = 0; f <= n; ++f) {
      for (std::size_t g = 0; f + g <= n; ++g) {
        if (f < g) continue;
        const double rest = static_cast<double>(n - f - g);
        if ((f > 0 && favour == 0.0) || (g > 0 && against == 0.0) || (rest > 0 && neutral == 0.0))
          continue;
        const double lp = std::lgamma(n + 1.0) - std::lgamma(f + 1.0) - std::lgamma(g + 1.0) -
                          std::lgamma(rest + 1.0) + log_term(f, favour) + log_term(g, against) +
                          log_term(rest, neutral);
        win += (f > g ? 1.0 : 0.5) * std::exp(lp);
      }
    }
    const double none_decisive = std::pow(1.0 - decisive, static_cast<double>(n));
    return (1.0 - none_decisive) + win;
  };
  return 0.5 * (one_side(j, k) + one_side(k, j));
}

double bayes_accuracy_estimate(const ConfusionSpec& spec, std::size_t docs_per_class,
                               std::uint64_t seed) {
  spec.validate();
  if (docs_per_class == 0) throw ValidationError("bayes_accuracy_estimate: docs_per_class must be positive");
  const std::size_t c = spec.num_classes();
  std::vector<std::vector<double>> logp(c);
  std::vector<std::vector<double>> cdf(c);
  for (std::size_t k = 0; k < c; ++k) {
    const auto dist = spec.class_distribution(k);
    for (double p : dist) logp[k].push_back(p > 0.0 ? std::log(p) : -HUGE_VAL);
    std::partial_sum(dist.begin(), dist.end(), std::back_inserter(cdf[k]));
  }
  Rng rng(seed);
  double correct = 0.0;
  std::vector<double> score(c);
  for (std::size_t d = 0; d < docs_per_class; ++d) {
    for (std::size_t k = 0; k < c; ++k) {
      std::fill(score.begin(), score.end(), 0.0);
      for (std::size_t t = 0; t < spec.doc_length; ++t) {
        const double u = rng.uniform() * cdf[k].back();
        auto it = std::upper_bound(cdf[k].begin(), cdf[k].end(), u);
        if (it == cdf[k].end()) --it;
        const auto w = static_cast<std::size_t>(it - cdf[k].begin());
        for (std::size_t m = 0; m < c; ++m) score[m] += logp[m][w];
      }
      const double best = *std::max_element(score.begin(), score.end());
      const auto ties = std::count(score.begin(), score.end(), best);
      if (score[k] == best) correct += 1.0 / static_cast<double>(ties);
    }
  }
  return correct / static_cast<double>(docs_per_class * c);
}

// ----------------------------------------------------- pretrained vectors

EmbeddingLoad load_pretrained_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                                         std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("load_pretrained_embeddings: dim must be positive");
  Rng rng(seed);
  EmbeddingLoad out{init_embedding(vocab.size(), dim, rng), 0.0};
  auto in = open_in(path);
  std::vector<bool> covered(vocab.size(), false);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (fields >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      }
    }
    if (values.size() != dim)
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                        " values, got " + std::to_string(values.size()));
    const std::int32_t id = vocab.id(token);
    if (id < 2 || covered[static_cast<std::size_t>(id)]) continue;
    covered[static_cast<std::size_t>(id)] = true;
    std::copy(values.begin(), values.end(), out.table.data().begin() + static_cast<std::ptrdiff_t>(id) * static_cast<std::ptrdiff_t>(dim));
  }
  const std::size_t n = vocab.tokens().size();
  const auto hits = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
  out.coverage = n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
  return out;
}

}  // namespace lcm::data
