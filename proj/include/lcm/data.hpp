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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lcm/autodiff.hpp"

namespace lcm::data {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnknownId = 1;

/// Lowercased whitespace tokenization.
std::vector<std::string> tokenize(const std::string& text);

/// Token table with ids 0 (padding) and 1 (unknown) reserved.
class Vocab {
 public:
  Vocab() = default;
  /// `tokens` are assigned ids 2, 3, ... in order.
  Vocab(std::vector<std::string> tokens, std::size_t min_freq);

  std::int32_t id(const std::string& token) const;
  const std::string& token(std::int32_t id) const;
  /// Total id count including the two reserved ids.
  std::size_t size() const { return tokens_.size() + 2; }
  /// Non-reserved tokens in id order.
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t min_freq() const { return min_freq_; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_ && a.min_freq_ == b.min_freq_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> ids_;
  std::size_t min_freq_ = 1;
};

/// Frequency-ordered vocabulary: ties broken lexicographically, tokens below
/// `min_freq` dropped, then truncated to `max_size` non-reserved entries.
Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t min_freq,
                  std::size_t max_size);

struct Example {
  /// Padded to the dataset's max_len with kPadId; only the first `length`
  /// entries are real tokens.
  std::vector<std::int32_t> token_ids;
  std::size_t length = 0;
  /// Set instead of token_ids for fixed-length vector inputs.
  std::vector<double> features;
  std::int32_t label = 0;
  /// Label before noise injection, when it was changed.
  std::optional<std::int32_t> original_label;

  bool is_vector() const { return !features.empty(); }
};

struct Dataset {
  std::vector<Example> examples;
  /// Defines class indices everywhere downstream.
  std::vector<std::string> label_names;
  std::string provenance;
  /// Embedding rows needed for token data (vocabulary size including the
  /// reserved ids); 0 for vector data.
  std::size_t vocab_size = 0;

  std::size_t num_classes() const { return label_names.size(); }
  std::size_t size() const { return examples.size(); }
  /// Feature dimension for vector data, 0 for token data.
  std::size_t feature_dim() const;
  std::vector<std::int32_t> labels() const;
};

/// One line of a JSON-lines corpus.
struct RawRecord {
  std::string text;
  std::vector<double> features;
  std::string label;
  std::optional<std::string> original_label;
  bool is_vector = false;
};

std::vector<RawRecord> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<RawRecord>& records);

/// Label names in order of first appearance.
std::vector<std::string> label_names_of(const std::vector<RawRecord>& records);

/// Tokenizes, maps unknown tokens to kUnknownId and truncates/pads to
/// `max_len`. Rejects records whose label is not in `label_names`.
Dataset encode_corpus(const std::vector<RawRecord>& records, const Vocab& vocab,
                      const std::vector<std::string>& label_names, std::size_t max_len);

/// Inverse of encode_corpus for writing a dataset back to JSON lines.
std::vector<RawRecord> to_records(const Dataset& dataset, const Vocab& vocab);

/// Seeded shuffle; the first floor(N * train_fraction) examples form the
/// training set.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed);
/// Example indices assigned to the test side by split_dataset.
std::vector<std::size_t> split_test_indices(std::size_t n, double train_fraction,
                                            std::uint64_t seed);

// ------------------------------------------------------- label groups

using GroupMap = std::map<std::string, std::string>;

GroupMap read_group_map(const std::filesystem::path& path);
void write_group_map(const std::filesystem::path& path, const GroupMap& groups);
/// Checks the map covers every label.
void validate_group_map(const GroupMap& groups, const std::vector<std::string>& label_names);

struct NoiseReport {
  std::size_t eligible = 0;
  std::size_t flipped = 0;
};

/// Relabels exactly round(rate * eligible) examples, each to a uniformly
/// chosen different label of the same group. An example is eligible when its
/// label's group has at least two members. Original labels are retained on
/// the examples.
Dataset inject_label_noise(const Dataset& dataset, const GroupMap& groups, double rate,
                           std::uint64_t seed, NoiseReport* report = nullptr);

// ---------------------------------------------- synthetic confused corpus

/// Unigram topic-mixture generator.
///
/// Class k draws every token i.i.d. from its effective distribution. For a
/// class paired with partner j at overlap w this is the own topic moved a
/// fraction w toward the pair midpoint, (1 - w/2) * own + (w/2) * partner, so
/// w = 0 keeps the topics apart and w = 1 makes the pair indistinguishable.
struct ConfusionSpec {
  /// C rows over a shared vocabulary, each summing to 1.
  std::vector<std::vector<double>> topics;
  /// Partner class per class, or -1.
  std::vector<int> partner;
  /// Overlap per class; equal within a pair.
  std::vector<double> overlap;
  std::size_t samples_per_class = 0;
  std::size_t doc_length = 0;
  std::uint64_t seed = 0;

  std::size_t num_classes() const { return topics.size(); }
  std::size_t vocab_size() const { return topics.empty() ? 0 : topics.front().size(); }
  void validate() const;
  /// Effective token distribution of class k.
  std::vector<double> class_distribution(std::size_t k) const;
};

/// Disjoint topic blocks of `words_per_class` words with seeded weights in
/// [0.5, 1.5) before normalization.
std::vector<std::vector<double>> block_topics(std::size_t classes, std::size_t words_per_class,
                                              std::uint64_t seed);

/// Pairs classes (0,1), (2,3), ... at `overlap`; an odd last class stays unpaired.
ConfusionSpec paired_spec(std::size_t classes, std::size_t words_per_class, double overlap,
                          std::size_t samples_per_class, std::size_t doc_length,
                          std::uint64_t seed);

/// Word w of the generator vocabulary is named "w<w>" and has id w + 2 in
/// generator_vocab().
Vocab generator_vocab(const ConfusionSpec& spec);
std::vector<std::string> generator_label_names(std::size_t classes);
/// Groups every pair; unpaired classes get singleton groups.
GroupMap generator_groups(const ConfusionSpec& spec);

/// Balanced corpus, classes interleaved, fully determined by spec.seed.
Dataset generate_confused_corpus(const ConfusionSpec& spec);

/// Exact accuracy of the likelihood-ratio classifier between classes j and k
/// (equal priors, ties split evenly). Needs disjoint topic supports for the
/// two classes, so every token shifts the log-likelihood ratio by the same
/// magnitude and the decision reduces to a binomial count.
double pair_bayes_accuracy(const ConfusionSpec& spec, std::size_t j, std::size_t k);

/// Monte-Carlo accuracy of the unigram Bayes classifier over all classes on
/// fresh documents drawn from the generator (ties split evenly).
double bayes_accuracy_estimate(const ConfusionSpec& spec, std::size_t docs_per_class,
                               std::uint64_t seed);

// ------------------------------------------------ pretrained embeddings

struct EmbeddingLoad {
  ad::Tensor table;  // vocab.size() x dim
  double coverage = 0.0;
};

/// Reads "token v1 ... vd" lines. Tokens missing from the file keep the
/// seeded uniform [-0.05, 0.05] initialization used by the encoders.
EmbeddingLoad load_pretrained_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                                         std::size_t dim, std::uint64_t seed);

}  // namespace lcm::data
