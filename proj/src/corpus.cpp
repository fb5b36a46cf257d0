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

#include "uprobe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uprobe/errors.hpp"

namespace uprobe {
namespace {

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool IsSlot(const std::string& word) {
  return word.size() > 2 && word.front() == '{' && word.back() == '}';
}

const std::set<std::string>& KnownSlots() {
  static const std::set<std::string> kSlots = {
      "{cue}", "{target}", "{attr}", "{rcv:cue}", "{rcv:attr}",
      "{obj}", "{adj}",    "{adv}",  "{prep}"};
  return kSlots;
}

void ConfigCheck(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::kConfig, message);
}

}  // namespace

void ValidateInstance(const AgreementInstance& inst) {
  auto fail = [](const std::string& m) {
    throw Error(ErrorKind::kValidation, m);
  };
  const std::size_t n = inst.tokens.size();
  if (n == 0) fail("empty token sequence");
  if (inst.cue_index >= n) fail("cue_index out of range");
  if (inst.target_index >= n) fail("target_index out of range");
  if (inst.cue_index == inst.target_index) {
    fail("cue_index equals target_index");
  }
  if (inst.attractor_count < 0) fail("attractor_count is negative");
  if (inst.target_sg_form.empty() || inst.target_pl_form.empty()) {
    fail("empty candidate form");
  }
  if (inst.target_sg_form == inst.target_pl_form) {
    fail("candidate forms are identical");
  }
  const std::string& at_target = inst.tokens[inst.target_index];
  if (at_target != inst.target_sg_form && at_target != inst.target_pl_form) {
    fail("token at target_index \"" + at_target +
         "\" matches neither candidate form");
  }
  if (at_target != inst.correct_form()) {
    fail("token at target_index disagrees with target_number");
  }
  if (inst.cue_number != inst.target_number) {
    fail("cue_number differs from target_number (ungrammatical instance)");
  }
}

GrammarConfig DefaultGrammar() {
  GrammarConfig g;
  g.nouns = {
      {"boy", "boys"},         {"girl", "girls"},
      {"key", "keys"},         {"dog", "dogs"},
      {"cat", "cats"},         {"teacher", "teachers"},
      {"student", "students"}, {"doctor", "doctors"},
      {"farmer", "farmers"},   {"author", "authors"},
      {"pilot", "pilots"},     {"senator", "senators"},
      {"lawyer", "lawyers"},   {"singer", "singers"},
      {"painter", "painters"}, {"driver", "drivers"},
      {"child", "children"},   {"man", "men"},
      {"woman", "women"},      {"mouse", "mice"},
      {"friend", "friends"},   {"neighbor", "neighbors"},
      {"officer", "officers"}, {"manager", "managers"},
      {"guard", "guards"},     {"clerk", "clerks"},
      {"nurse", "nurses"},     {"chef", "chefs"},
      {"baker", "bakers"},     {"king", "kings"},
      {"queen", "queens"},     {"horse", "horses"},
      {"bird", "birds"},       {"book", "books"},
      {"car", "cars"},         {"house", "houses"},
      {"box", "boxes"},        {"table", "tables"},
      {"picture", "pictures"}, {"letter", "letters"},
      {"bottle", "bottles"},   {"window", "windows"},
      {"door", "doors"},       {"flower", "flowers"},
      {"song", "songs"},       {"game", "games"},
      {"chair", "chairs"},     {"lamp", "lamps"},
      {"coin", "coins"},       {"ship", "ships"},
      {"village", "villages"}, {"city", "cities"},
      {"company", "companies"}, {"story", "stories"},
      {"machine", "machines"}, {"computer", "computers"},
      {"garden", "gardens"},   {"road", "roads"},
      {"bridge", "bridges"},   {"tower", "towers"},
      {"river", "rivers"},     {"island", "islands"},
      {"castle", "castles"},   {"market", "markets"},
      {"museum", "museums"},   {"school", "schools"},
      {"movie", "movies"},     {"farm", "farms"},
      {"actor", "actors"},     {"soldier", "soldiers"},
      {"poet", "poets"},       {"judge", "judges"},
  };
  g.verbs = {
      {"goes", "go"},           {"holds", "hold"},
      {"likes", "like"},        {"sees", "see"},
      {"knows", "know"},        {"finds", "find"},
      {"makes", "make"},        {"takes", "take"},
      {"wants", "want"},        {"needs", "need"},
      {"loves", "love"},        {"hates", "hate"},
      {"meets", "meet"},        {"helps", "help"},
      {"calls", "call"},        {"follows", "follow"},
      {"watches", "watch"},     {"visits", "visit"},
      {"remembers", "remember"}, {"admires", "admire"},
      {"brings", "bring"},      {"keeps", "keep"},
      {"carries", "carry"},     {"pushes", "push"},
      {"pulls", "pull"},        {"opens", "open"},
      {"builds", "build"},      {"moves", "move"},
      {"paints", "paint"},      {"reads", "read"},
      {"writes", "write"},      {"describes", "describe"},
      {"protects", "protect"},  {"chases", "chase"},
      {"avoids", "avoid"},      {"praises", "praise"},
  };
  g.adjectives = {"old",   "young", "small", "big",   "tall",
                  "happy", "quiet", "red",   "green", "strange"};
  g.adverbs = {"often",  "rarely", "never",     "always", "usually",
               "sometimes", "really", "still", "also",   "certainly"};
  g.prepositions = {"near", "behind", "beside", "with",
                    "from", "under",  "above",  "without"};
  g.templates = {
      // no attractor
      "the {cue} {target} the {obj} .",
      "the {adj} {cue} {target} the {obj} .",
      "the {cue} {adv} {target} the {obj} .",
      "the {cue} {adv} {adv} {target} the {obj} .",
      "the {cue} that {rcv:cue} {adv} {target} the {obj} .",
      "the {adj} {adj} {cue} that {adv} {rcv:cue} {adv} {target} .",
      // one attractor
      "the {cue} {prep} the {attr} {target} the {obj} .",
      "the {cue} that {rcv:cue} the {attr} {target} to the {obj} .",
      "the {cue} that the {attr} {rcv:attr} {target} the {obj} .",
      "the {cue} {prep} the {adj} {attr} {adv} {target} .",
      "the {cue} that {rcv:cue} the {adj} {adj} {attr} {adv} {adv} "
      "{target} .",
      "the {cue} that the {adj} {attr} {adv} {rcv:attr} {adv} {adv} "
      "{target} the {obj} .",
      "the {cue} that {adv} {rcv:cue} the {adj} {adj} {attr} {adv} {adv} "
      "{adv} {target} .",
      // two attractors
      "the {cue} {prep} the {attr} {prep} the {attr} {target} the {obj} .",
      "the {cue} that {rcv:cue} the {attr} {prep} the {attr} {target} .",
      "the {cue} that the {attr} {rcv:attr} {prep} the {adj} {attr} {adv} "
      "{target} .",
      "the {cue} {prep} the {adj} {attr} that {rcv:attr} the {adj} {adj} "
      "{attr} {adv} {adv} {target} .",
      "the {adj} {cue} that {adv} {rcv:cue} the {adj} {adj} {attr} {prep} "
      "the {adj} {adj} {attr} {adv} {adv} {target} .",
  };
  g.max_attractors = 2;
  return g;
}

int TemplateAttractorCount(std::string_view tmpl) {
  int count = 0;
  for (const auto& w : SplitWords(tmpl)) count += (w == "{attr}");
  return count;
}

void ValidateGrammar(const GrammarConfig& config) {
  ConfigCheck(!config.nouns.empty(), "noun lexicon is empty");
  ConfigCheck(!config.verbs.empty(), "verb lexicon is empty");
  ConfigCheck(!config.templates.empty(), "template set is empty");
  ConfigCheck(config.max_attractors >= 0, "max_attractors is negative");

  std::set<std::string> seen;
  auto claim = [&](const std::string& w, const char* what) {
    ConfigCheck(!w.empty(), std::string("empty ") + what + " form");
    ConfigCheck(w.find_first_of(" \t\n") == std::string::npos,
                std::string(what) + " form \"" + w + "\" contains spaces");
    ConfigCheck(seen.insert(w).second,
                "word form \"" + w + "\" appears more than once");
  };
  for (const auto& lx : config.nouns) {
    claim(lx.sg, "noun");
    claim(lx.pl, "noun");
  }
  for (const auto& lx : config.verbs) {
    claim(lx.sg, "verb");
    claim(lx.pl, "verb");
  }

  std::set<int> realized;
  for (const auto& tmpl : config.templates) {
    int cues = 0, targets = 0, attrs = 0;
    bool attr_before_rcv = false;
    for (const auto& w : SplitWords(tmpl)) {
      if (!IsSlot(w)) continue;
      ConfigCheck(KnownSlots().count(w) > 0,
                  "unknown slot " + w + " in template \"" + tmpl + "\"");
      cues += (w == "{cue}");
      targets += (w == "{target}");
      if (w == "{attr}") {
        ++attrs;
        attr_before_rcv = true;
      }
      if (w == "{rcv:attr}") {
        ConfigCheck(attr_before_rcv,
                    "{rcv:attr} without a preceding {attr} in \"" + tmpl +
                        "\"");
      }
      if (w == "{adj}") {
        ConfigCheck(!config.adjectives.empty(),
                    "template uses {adj} but no adjectives are configured");
      }
      if (w == "{adv}") {
        ConfigCheck(!config.adverbs.empty(),
                    "template uses {adv} but no adverbs are configured");
      }
      if (w == "{prep}") {
        ConfigCheck(!config.prepositions.empty(),
                    "template uses {prep} but no prepositions are configured");
      }
    }
    ConfigCheck(cues == 1 && targets == 1,
                "template must contain exactly one {cue} and one {target}: \"" +
                    tmpl + "\"");
    if (attrs > 0) {
      ConfigCheck(config.nouns.size() >= 2,
                  "attractor templates need at least two noun lexemes");
    }
    realized.insert(attrs);
  }
  for (int a = 0; a <= config.max_attractors; ++a) {
    ConfigCheck(realized.count(a) > 0,
                "no template realizes " + std::to_string(a) + " attractor(s)");
  }
}

Dataset GenerateCorpus(const GrammarConfig& config, std::size_t n,
                       std::uint64_t seed) {
  if (n == 0) throw Error(ErrorKind::kConfig, "corpus size must be positive");
  ValidateGrammar(config);

  std::map<int, std::vector<const std::string*>> by_attractors;
  for (const auto& t : config.templates) {
    int a = TemplateAttractorCount(t);
    if (a <= config.max_attractors) by_attractors[a].push_back(&t);
  }

  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t size) {
    return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
  };
  const std::size_t strata = static_cast<std::size_t>(config.max_attractors) + 1;

  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NumberLabel number =
        (i % 2 == 0) ? NumberLabel::kSingular : NumberLabel::kPlural;
    const int attractors = static_cast<int>((i / 2) % strata);
    const auto& choices = by_attractors.at(attractors);
    const std::vector<std::string> slots = SplitWords(*choices[pick(choices.size())]);

    AgreementInstance inst;
    inst.cue_number = number;
    inst.target_number = number;
    inst.attractor_count = attractors;
    const std::size_t cue_lexeme = pick(config.nouns.size());
    const Lexeme& verb = config.verbs[pick(config.verbs.size())];
    inst.target_sg_form = verb.sg;
    inst.target_pl_form = verb.pl;
    NumberLabel last_attr = Flip(number);

    for (const auto& w : slots) {
      if (w == "{cue}") {
        inst.cue_index = inst.tokens.size();
        inst.tokens.push_back(config.nouns[cue_lexeme].form(number));
      } else if (w == "{target}") {
        inst.target_index = inst.tokens.size();
        inst.tokens.push_back(verb.form(number));
      } else if (w == "{attr}") {
        std::size_t lx = pick(config.nouns.size() - 1);
        if (lx >= cue_lexeme) ++lx;
        last_attr = Flip(number);
        inst.tokens.push_back(config.nouns[lx].form(last_attr));
      } else if (w == "{rcv:cue}") {
        inst.tokens.push_back(config.verbs[pick(config.verbs.size())].form(number));
      } else if (w == "{rcv:attr}") {
        inst.tokens.push_back(
            config.verbs[pick(config.verbs.size())].form(last_attr));
      } else if (w == "{obj}") {
        const Lexeme& lx = config.nouns[pick(config.nouns.size())];
        inst.tokens.push_back(pick(2) == 0 ? lx.sg : lx.pl);
      } else if (w == "{adj}") {
        inst.tokens.push_back(config.adjectives[pick(config.adjectives.size())]);
      } else if (w == "{adv}") {
        inst.tokens.push_back(config.adverbs[pick(config.adverbs.size())]);
      } else if (w == "{prep}") {
        inst.tokens.push_back(
            config.prepositions[pick(config.prepositions.size())]);
      } else {
        inst.tokens.push_back(w);
      }
    }
    out.push_back(std::move(inst));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

namespace {

AgreementInstance FromJson(const nlohmann::json& j) {
  AgreementInstance inst;
  inst.tokens = j.at("tokens").get<std::vector<std::string>>();
  inst.cue_index = j.at("cue_index").get<std::size_t>();
  inst.target_index = j.at("target_index").get<std::size_t>();
  inst.cue_number = ParseNumber(j.at("cue_number").get<std::string>());
  inst.target_number = ParseNumber(j.at("target_number").get<std::string>());
  inst.target_sg_form = j.at("target_sg_form").get<std::string>();
  inst.target_pl_form = j.at("target_pl_form").get<std::string>();
  inst.attractor_count = j.at("attractor_count").get<int>();
  return inst;
}

}  // namespace

Dataset ParseDataset(std::istream& in) {
  Dataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    AgreementInstance inst;
    try {
      inst = FromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw LineError(ErrorKind::kParse, lineno, e.what());
    } catch (const Error& e) {
      throw LineError(ErrorKind::kParse, lineno, e.what());
    }
    try {
      ValidateInstance(inst);
    } catch (const Error& e) {
      throw LineError(ErrorKind::kValidation, lineno, e.what());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

Dataset LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open dataset " + path);
  return ParseDataset(in);
}

std::string ToJsonLine(const AgreementInstance& inst) {
  nlohmann::ordered_json j;
  j["tokens"] = inst.tokens;
  j["cue_index"] = inst.cue_index;
  j["target_index"] = inst.target_index;
  j["cue_number"] = std::string(ToString(inst.cue_number));
  j["target_number"] = std::string(ToString(inst.target_number));
  j["target_sg_form"] = inst.target_sg_form;
  j["target_pl_form"] = inst.target_pl_form;
  j["attractor_count"] = inst.attractor_count;
  return j.dump();
}

void WriteDataset(std::ostream& out, const Dataset& data) {
  for (const auto& inst : data) out << ToJsonLine(inst) << '\n';
}

void SaveDataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  WriteDataset(out, data);
}

SplitIndices SplitIndicesFor(const Dataset& data, double train_frac,
                             double dev_frac, std::uint64_t seed) {
  ConfigCheck(train_frac > 0.0 && train_frac < 1.0,
              "train fraction must lie in (0,1)");
  ConfigCheck(dev_frac > 0.0 && dev_frac < 1.0,
              "dev fraction must lie in (0,1)");
  ConfigCheck(train_frac + dev_frac < 1.0,
              "train and dev fractions must sum to less than 1");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> groups[2];
  for (std::size_t i = 0; i < data.size(); ++i) {
    groups[data[i].cue_number == NumberLabel::kSingular ? 0 : 1].push_back(i);
  }
  // Interleave the shuffled label groups by relative rank so that every
  // prefix of the merged order keeps the global label ratio.
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(data.size());
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    for (std::size_t r = 0; r < g.size(); ++r) {
      keyed.emplace_back((static_cast<double>(r) + 0.5) /
                             static_cast<double>(g.size()),
                         g[r]);
    }
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * n));
  const auto n_dev = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(dev_frac * n)));
  SplitIndices out;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t idx = keyed[r].second;
    if (r < n_train) {
      out.train.push_back(idx);
    } else if (r < n_train + n_dev) {
      out.dev.push_back(idx);
    } else {
      out.test.push_back(idx);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.dev.begin(), out.dev.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

DatasetSplit Split(const Dataset& data, double train_frac, double dev_frac,
                   std::uint64_t seed) {
  const SplitIndices idx = SplitIndicesFor(data, train_frac, dev_frac, seed);
  auto gather = [&](const std::vector<std::size_t>& ids) {
    Dataset out;
    out.reserve(ids.size());
    for (auto i : ids) out.push_back(data[i]);
    return out;
  };
  return {gather(idx.train), gather(idx.dev), gather(idx.test)};
}

LabelStats ComputeLabelStats(const Dataset& data) {
  LabelStats s;
  s.n = data.size();
  for (const auto& inst : data) {
    (inst.cue_number == NumberLabel::kSingular ? s.singular : s.plural)++;
    s.by_attractors[inst.attractor_count]++;
    s.by_distance[inst.distance()]++;
  }
  if (s.n > 0) {
    s.majority_rate = static_cast<double>(std::max(s.singular, s.plural)) /
                      static_cast<double>(s.n);
  }
  return s;
}

Vocabulary::Vocabulary() {
  Add("[PAD]", "[PAD]");
  Add("[UNK]", "[UNK]");
  Add(std::string(kMaskToken), std::string(kMaskToken));
}

int Vocabulary::Add(const std::string& word, const std::string& lemma) {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(words_.size());
  words_.push_back(word);
  lemmas_.push_back(lemma);
  index_.emplace(word, id);
  return id;
}

bool Vocabulary::Contains(std::string_view word) const {
  return index_.count(std::string(word)) > 0;
}

int Vocabulary::Id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

std::string Vocabulary::LemmaOf(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? std::string(word) : lemmas_[it->second];
}

std::vector<int> Vocabulary::Encode(
    const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(Id(t));
  return ids;
}

Vocabulary Vocabulary::FromGrammar(const GrammarConfig& config) {
  ValidateGrammar(config);
  Vocabulary v;
  for (const auto& lx : config.nouns) {
    v.Add(lx.sg, lx.sg);
    v.Add(lx.pl, lx.sg);
  }
  for (const auto& lx : config.verbs) {
    v.Add(lx.sg, lx.sg);
    v.Add(lx.pl, lx.sg);
  }
  std::set<std::string> literals;
  for (const auto& t : config.templates) {
    for (const auto& w : SplitWords(t)) {
      if (!IsSlot(w)) literals.insert(w);
    }
  }
  for (const auto& group :
       {config.adjectives, config.adverbs, config.prepositions}) {
    for (const auto& w : group) literals.insert(w);
  }
  for (const auto& w : literals) v.Add(w, w);
  return v;
}

Vocabulary Vocabulary::FromDataset(const Dataset& data) {
  Vocabulary v;
  for (const auto& inst : data) {
    v.Add(inst.target_sg_form, inst.target_sg_form);
    v.Add(inst.target_pl_form, inst.target_sg_form);
  }
  std::set<std::string> rest;
  for (const auto& inst : data) {
    for (const auto& t : inst.tokens) {
      if (!v.Contains(t)) rest.insert(t);
    }
  }
  for (const auto& w : rest) v.Add(w, w);
  return v;
}

}  // namespace uprobe
