// Copyright 2026 The uprobe Authors.
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

#ifndef UPROBE_CORPUS_HPP_
#define UPROBE_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uprobe/number.hpp"

namespace uprobe {

// One subject-verb agreement item. Tokens are whitespace-separated words;
// the cue is the subject noun and the target the verb that agrees with it.
struct AgreementInstance {
  std::vector<std::string> tokens;
  std::size_t cue_index = 0;
  std::size_t target_index = 0;
  NumberLabel cue_number = NumberLabel::kSingular;
  NumberLabel target_number = NumberLabel::kSingular;
  std::string target_sg_form;
  std::string target_pl_form;
  int attractor_count = 0;

  const std::string& correct_form() const {
    return target_number == NumberLabel::kSingular ? target_sg_form
                                                   : target_pl_form;
  }
  const std::string& wrong_form() const {
    return target_number == NumberLabel::kSingular ? target_pl_form
                                                   : target_sg_form;
  }
  std::size_t distance() const {
    return cue_index > target_index ? cue_index - target_index
                                    : target_index - cue_index;
  }

  bool operator==(const AgreementInstance&) const = default;
};

using Dataset = std::vector<AgreementInstance>;

// Throws Error(kValidation) describing the first violated invariant.
void ValidateInstance(const AgreementInstance& inst);

struct Lexeme {
  std::string sg;
  std::string pl;

  const std::string& form(NumberLabel n) const {
    return n == NumberLabel::kSingular ? sg : pl;
  }
  bool operator==(const Lexeme&) const = default;
};

// Templates are whitespace-separated words and slots:
//   {cue}       subject noun (exactly one)
//   {target}    agreeing verb (exactly one)
//   {attr}      attractor noun, number opposite to the cue
//   {rcv:cue}   relative-clause verb agreeing with the cue
//   {rcv:attr}  relative-clause verb agreeing with the closest preceding
//               attractor
//   {obj}       noun of random number
//   {adj} {adv} {prep}  filler drawn from the matching word list
// Anything else is copied literally.
struct GrammarConfig {
  std::vector<Lexeme> nouns;
  std::vector<Lexeme> verbs;
  std::vector<std::string> adjectives;
  std::vector<std::string> adverbs;
  std::vector<std::string> prepositions;
  std::vector<std::string> templates;
  int max_attractors = 2;

  bool operator==(const GrammarConfig&) const = default;
};

// English lexicon with templates spanning cue-target distances 1..15.
GrammarConfig DefaultGrammar();

// Throws Error(kConfig) on empty lexicons/templates, missing forms,
// ambiguous word forms, malformed templates, or an attractor count in
// [0, max_attractors] that no template realizes.
void ValidateGrammar(const GrammarConfig& config);

int TemplateAttractorCount(std::string_view tmpl);

// Exactly n instances, deterministic in seed. Cue numbers alternate so the
// singular/plural split is within one; attractor counts cycle through
// 0..max_attractors. Output order is shuffled.
Dataset GenerateCorpus(const GrammarConfig& config, std::size_t n,
                       std::uint64_t seed);

// JSONL, one object per line (see README for the schema). Blank lines are
// ignored. Parse failures raise LineError(kParse), invariant violations
// LineError(kValidation); both carry the 1-based line number.
Dataset ParseDataset(std::istream& in);
Dataset LoadDataset(const std::string& path);

std::string ToJsonLine(const AgreementInstance& inst);
void WriteDataset(std::ostream& out, const Dataset& data);
void SaveDataset(const std::string& path, const Dataset& data);

struct DatasetSplit {
  Dataset train;
  Dataset dev;
  Dataset test;
};

// Stratified by cue number so every split keeps the input's label ratio.
// Requires train_frac, dev_frac in (0,1) with sum < 1 (kConfig otherwise).
DatasetSplit Split(const Dataset& data, double train_frac, double dev_frac,
                   std::uint64_t seed);

// Index form of Split, useful for checking partitions.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};
SplitIndices SplitIndicesFor(const Dataset& data, double train_frac,
                             double dev_frac, std::uint64_t seed);

struct LabelStats {
  std::size_t n = 0;
  std::size_t singular = 0;
  std::size_t plural = 0;
  double majority_rate = 0.0;
  std::map<int, std::size_t> by_attractors;
  std::map<std::size_t, std::size_t> by_distance;
};

LabelStats ComputeLabelStats(const Dataset& data);

// Word-level vocabulary. Also records which word forms belong to the same
// lexeme so downstream analyses can group by lemma.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;
  static constexpr int kMaskId = 2;
  static constexpr std::string_view kMaskToken = "[MASK]";

  Vocabulary();

  static Vocabulary FromGrammar(const GrammarConfig& config);
  // Tokens plus both candidate forms of every instance. Verb forms share a
  // lemma (the singular form); other words are their own lemma.
  static Vocabulary FromDataset(const Dataset& data);

  int Add(const std::string& word, const std::string& lemma);
  int size() const { return static_cast<int>(words_.size()); }
  bool Contains(std::string_view word) const;
  // kUnkId for unknown words.
  int Id(std::string_view word) const;
  const std::string& Word(int id) const { return words_.at(id); }
  const std::string& Lemma(int id) const { return lemmas_.at(id); }
  std::string LemmaOf(std::string_view word) const;

  std::vector<int> Encode(const std::vector<std::string>& tokens) const;

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::string>& lemmas() const { return lemmas_; }

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && lemmas_ == other.lemmas_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::string> lemmas_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace uprobe

#endif  // UPROBE_CORPUS_HPP_
