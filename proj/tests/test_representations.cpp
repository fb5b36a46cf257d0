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

#include <set>

#include "helpers.hpp"
#include "uprobe/probes.hpp"
#include "uprobe/representations.hpp"

using namespace uprobe;
using uprobe::testing::KindOf;
using uprobe::testing::TempDir;
using uprobe::testing::TinyModel;

TEST_CASE("layer-0 rows are non-contextual") {
  const Model m = TinyModel();
  const Dataset data = GenerateCorpus(DefaultGrammar(), 300, 1);
  const RepresentationSet nouns = CollectRepresentations(m, data, Category::kNoun, 0);
  std::map<std::string, Eigen::Index> first;
  int shared = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string& w = data[i].tokens[data[i].cue_index];
    auto [it, fresh] = first.emplace(w, static_cast<Eigen::Index>(i));
    if (fresh) continue;
    ++shared;
    CHECK(nouns.rows.row(it->second) == nouns.rows.row(static_cast<Eigen::Index>(i)));
  }
  CHECK(shared > 0);
}

TEST_CASE("masked verbs carry no number at layer 0") {
  const Model m = TinyModel();
  const Dataset data = GenerateCorpus(DefaultGrammar(), 400, 2);
  const RepresentationSet mv = CollectRepresentations(m, data, Category::kMaskedVerb, 0);
  for (Eigen::Index i = 1; i < mv.rows.rows(); ++i) CHECK(mv.rows.row(i) == mv.rows.row(0));
  const RowSplit s = SplitRows(mv, 0.25, 3);
  const VInformation v = ComputeVInformation(TrainProbe(s.train, s.dev), s.dev);
  CHECK(v.i_v == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("category rows and mixed balancing") {
  const Model m = TinyModel();
  const Dataset data = GenerateCorpus(DefaultGrammar(), 120, 3);
  const auto nouns = CollectRepresentations(m, data, Category::kNoun, 1);
  const auto verbs = CollectRepresentations(m, data, Category::kVerb, 1);
  const auto mixed = CollectRepresentations(m, data, Category::kMixed, 1);
  CHECK(nouns.size() == data.size());
  CHECK(mixed.size() == 2 * std::min(nouns.size(), verbs.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(nouns.positions[i] == data[i].cue_index);
    CHECK(verbs.positions[i] == data[i].target_index);
    CHECK(nouns.labels[i] == data[i].cue_number);
  }
  const auto all = CollectAllLayers(m, data, Category::kVerb);
  REQUIRE(all.size() == 3);
  CHECK(all[1].rows == verbs.rows);
}

TEST_CASE("collection errors") {
  const Model m = TinyModel();
  CHECK(KindOf([&] { CollectRepresentations(m, {}, Category::kNoun, 0); }) ==
        ErrorKind::kData);
  const Dataset data = GenerateCorpus(DefaultGrammar(), 5, 3);
  CHECK(KindOf([&] { CollectRepresentations(m, data, Category::kNoun, 3); }) ==
        ErrorKind::kBounds);
}

TEST_CASE("lemma split keeps lemmas apart") {
  const Model m = TinyModel();
  const auto nouns =
      CollectRepresentations(m, GenerateCorpus(DefaultGrammar(), 400, 4), Category::kNoun, 2);
  const RowSplit s = SplitByLemma(nouns, 0.25, 5);
  std::set<std::string> a(s.train.lemmas.begin(), s.train.lemmas.end());
  for (const auto& l : s.dev.lemmas) CHECK(a.count(l) == 0);
  CHECK(s.train.size() + s.dev.size() == nouns.size());
  CHECK(s.dev.size() >= nouns.size() / 4);
}

TEST_CASE("REPR round trip") {
  TempDir dir("repr");
  const Model m = TinyModel();
  const auto r = CollectRepresentations(m, GenerateCorpus(DefaultGrammar(), 40, 6),
                                        Category::kMaskedVerb, 2);
  SaveRepresentations(r, dir.File("mv.repr"));
  const auto back = LoadRepresentations(dir.File("mv.repr"));
  CHECK(back.rows == r.rows);
  CHECK(back.labels == r.labels);
  CHECK(back.positions == r.positions);
  CHECK(back.lemmas == r.lemmas);
  CHECK(back.category == Category::kMaskedVerb);
  CHECK(back.layer == 2);
  CHECK(std::filesystem::exists(ManifestPath(dir.File("mv.repr"))));
}
