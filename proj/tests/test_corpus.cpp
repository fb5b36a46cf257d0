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

#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "uprobe/binio.hpp"
#include "uprobe/corpus.hpp"

using namespace uprobe;
using uprobe::testing::KindOf;
using uprobe::testing::TempDir;

namespace {

GrammarConfig BoyKeysGrammar() {
  GrammarConfig g;
  g.nouns = {{"boy", "boys"}, {"key", "keys"}};
  g.verbs = {{"goes", "go"}, {"holds", "hold"}};
  g.templates = {"the {cue} {target} .",
                 "the {cue} that {rcv:cue} the {attr} {target} ."};
  g.max_attractors = 1;
  return g;
}

std::string ValidLine() {
  return R"({"tokens":["the","boy","goes","."],"cue_index":1,"target_index":2,)"
         R"("cue_number":"sg","target_number":"sg","target_sg_form":"goes",)"
         R"("target_pl_form":"go","attractor_count":0})";
}

}  // namespace

TEST_CASE("relative clause template places cue and target") {
  const Dataset data = GenerateCorpus(BoyKeysGrammar(), 40, 5);
  bool found = false;
  for (const auto& inst : data) {
    if (inst.attractor_count == 0) continue;
    CHECK(inst.cue_index == 1);
    CHECK(inst.target_index == 6);
    CHECK(inst.attractor_count == 1);
    CHECK(inst.tokens.size() == 8);
    if (inst.tokens[1] == "boy" && inst.tokens[5] == "keys") {
      found = true;
      CHECK(inst.cue_number == NumberLabel::kSingular);
      CHECK(inst.tokens[6] == inst.target_sg_form);
      CHECK((inst.tokens[6] == "goes" || inst.tokens[6] == "holds"));
      CHECK((inst.tokens[3] == "holds" || inst.tokens[3] == "goes"));
    }
  }
  CHECK(found);
}

TEST_CASE("attractors disagree with the cue") {
  for (const auto& inst : GenerateCorpus(DefaultGrammar(), 300, 2)) {
    ValidateInstance(inst);
    if (inst.attractor_count == 0) continue;
    int opposite = 0;
    const auto g = DefaultGrammar();
    for (std::size_t i = 0; i < inst.tokens.size(); ++i) {
      if (i == inst.cue_index) continue;
      for (const auto& n : g.nouns) {
        if (inst.tokens[i] == n.form(Flip(inst.cue_number))) ++opposite;
      }
    }
    CHECK(opposite >= inst.attractor_count);
  }
}

TEST_CASE("corpus size boundaries") {
  CHECK(KindOf([] { GenerateCorpus(DefaultGrammar(), 0, 1); }) == ErrorKind::kConfig);
  CHECK(GenerateCorpus(DefaultGrammar(), 1, 1).size() == 1);
}

TEST_CASE("empty lexicon or template set is a configuration error") {
  GrammarConfig g = DefaultGrammar();
  g.nouns.clear();
  CHECK(KindOf([&] { GenerateCorpus(g, 5, 1); }) == ErrorKind::kConfig);
  g = DefaultGrammar();
  g.templates.clear();
  CHECK(KindOf([&] { ValidateGrammar(g); }) == ErrorKind::kConfig);
}

TEST_CASE("generated corpus is balanced and stratified") {
  const Dataset data = GenerateCorpus(DefaultGrammar(), 1001, 9);
  const LabelStats st = ComputeLabelStats(data);
  CHECK(st.n == 1001);
  CHECK((st.singular > st.plural ? st.singular - st.plural : st.plural - st.singular) <= 1);
  REQUIRE(st.by_attractors.size() == 3);
  for (const auto& [a, c] : st.by_attractors) {
    CHECK(c >= 300);
    CHECK(c <= 367);
  }
}

TEST_CASE("same seed gives byte-identical files") {
  TempDir dir("corpus");
  SaveDataset(dir.File("a.jsonl"), GenerateCorpus(DefaultGrammar(), 200, 7));
  SaveDataset(dir.File("b.jsonl"), GenerateCorpus(DefaultGrammar(), 200, 7));
  CHECK(binio::ReadFileBytes(dir.File("a.jsonl")) ==
        binio::ReadFileBytes(dir.File("b.jsonl")));
  SaveDataset(dir.File("c.jsonl"), GenerateCorpus(DefaultGrammar(), 200, 8));
  CHECK(binio::ReadFileBytes(dir.File("a.jsonl")) !=
        binio::ReadFileBytes(dir.File("c.jsonl")));
}

TEST_CASE("JSONL round trip") {
  TempDir dir("jsonl");
  const Dataset data = GenerateCorpus(DefaultGrammar(), 50, 4);
  SaveDataset(dir.File("d.jsonl"), data);
  CHECK(LoadDataset(dir.File("d.jsonl")) == data);
  const std::string text = binio::ReadFileText(dir.File("d.jsonl"));
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');
}

TEST_CASE("three valid lines parse") {
  std::istringstream in(ValidLine() + "\n" + ValidLine() + "\n" + ValidLine() + "\n");
  CHECK(ParseDataset(in).size() == 3);
}

TEST_CASE("malformed JSON reports its line") {
  std::istringstream in(ValidLine() + "\n{\"tokens\": [\n");
  try {
    ParseDataset(in);
    FAIL("expected a parse error");
  } catch (const LineError& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(e.line() == 2);
  }
}

TEST_CASE("cue equal to target is a validation error naming the line") {
  std::string bad = ValidLine();
  bad.replace(bad.find("\"target_index\":2"), 16, "\"target_index\":1");
  std::istringstream in(ValidLine() + "\n" + ValidLine() + "\n" + bad + "\n");
  try {
    ParseDataset(in);
    FAIL("expected a validation error");
  } catch (const LineError& e) {
    CHECK(e.kind() == ErrorKind::kValidation);
    CHECK(e.line() == 3);
  }
}

TEST_CASE("target token must be a candidate form") {
  AgreementInstance inst;
  inst.tokens = {"the", "boy", "runs", "."};
  inst.cue_index = 1;
  inst.target_index = 2;
  inst.target_sg_form = "goes";
  inst.target_pl_form = "go";
  CHECK(KindOf([&] { ValidateInstance(inst); }) == ErrorKind::kValidation);
  inst.tokens[2] = "go";  // plural form under a singular label
  CHECK(KindOf([&] { ValidateInstance(inst); }) == ErrorKind::kValidation);
  inst.tokens[2] = "goes";
  CHECK_NOTHROW(ValidateInstance(inst));
}

TEST_CASE("split sizes, determinism and balance") {
  const Dataset data = GenerateCorpus(DefaultGrammar(), 1000, 3);
  const DatasetSplit s = Split(data, 0.8, 0.1, 11);
  CHECK(s.train.size() == 800);
  CHECK(s.dev.size() == 100);
  CHECK(s.test.size() == 100);
  const SplitIndices a = SplitIndicesFor(data, 0.8, 0.1, 11);
  const SplitIndices b = SplitIndicesFor(data, 0.8, 0.1, 11);
  CHECK(a.train == b.train);
  CHECK(a.dev == b.dev);
  CHECK(a.test == b.test);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.dev.begin(), a.dev.end());
  all.insert(a.test.begin(), a.test.end());
  CHECK(all.size() == 1000);
  for (const Dataset* part : {&s.train, &s.dev, &s.test}) {
    const LabelStats st = ComputeLabelStats(*part);
    CHECK(static_cast<double>(st.singular) / st.n == doctest::Approx(0.5).epsilon(0.04));
  }
}

TEST_CASE("split fractions out of range") {
  const Dataset data = GenerateCorpus(DefaultGrammar(), 20, 3);
  CHECK(KindOf([&] { Split(data, 0.0, 0.1, 1); }) == ErrorKind::kConfig);
  CHECK(KindOf([&] { Split(data, 0.8, 1.2, 1); }) == ErrorKind::kConfig);
  CHECK(KindOf([&] { Split(data, 0.8, 0.3, 1); }) == ErrorKind::kConfig);
}

TEST_CASE("vocabulary") {
  const Vocabulary v = Vocabulary::FromGrammar(DefaultGrammar());
  CHECK(v.Id(Vocabulary::kMaskToken) == Vocabulary::kMaskId);
  CHECK(v.Id("no-such-word") == Vocabulary::kUnkId);
  CHECK(v.LemmaOf("go") == v.LemmaOf("goes"));
  CHECK(v.LemmaOf("boy") == v.LemmaOf("boys"));
  CHECK(v.LemmaOf("boy") != v.LemmaOf("girl"));
  const Dataset data = GenerateCorpus(DefaultGrammar(), 30, 3);
  const Vocabulary dv = Vocabulary::FromDataset(data);
  for (const auto& inst : data) {
    for (const auto& t : inst.tokens) CHECK(dv.Contains(t));
    CHECK(dv.Contains(inst.wrong_form()));
  }
}
