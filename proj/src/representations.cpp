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

#include "uprobe/representations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "uprobe/binio.hpp"
#include "uprobe/errors.hpp"
#include "uprobe/parallel.hpp"

namespace uprobe {
namespace {

constexpr std::uint32_t kReprVersion = 1;

struct RowSource {
  bool masked;
  bool at_cue;
};

}  // namespace

std::string_view ToString(Category c) {
  switch (c) {
    case Category::kNoun: return "noun";
    case Category::kVerb: return "verb";
    case Category::kMaskedVerb: return "masked_verb";
    case Category::kMixed: return "mixed";
  }
  return "noun";
}

Category ParseCategory(std::string_view text) {
  if (text == "noun" || text == "nouns") return Category::kNoun;
  if (text == "verb" || text == "verbs") return Category::kVerb;
  if (text == "masked_verb" || text == "masked-verb" || text == "masked_verbs") {
    return Category::kMaskedVerb;
  }
  if (text == "mixed") return Category::kMixed;
  throw Error(ErrorKind::kParse,
              "unknown category \"" + std::string(text) + "\"");
}

RepresentationSet RepresentationSet::Subset(
    const std::vector<std::size_t>& idx) const {
  RepresentationSet out;
  out.category = category;
  out.layer = layer;
  out.rows.resize(static_cast<Eigen::Index>(idx.size()), rows.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.rows.row(static_cast<Eigen::Index>(i)) =
        rows.row(static_cast<Eigen::Index>(idx[i]));
    out.labels.push_back(labels[idx[i]]);
    out.positions.push_back(positions[idx[i]]);
    out.lemmas.push_back(lemmas[idx[i]]);
  }
  return out;
}

void ValidateRepresentations(const RepresentationSet& r) {
  const auto n = static_cast<std::size_t>(r.rows.rows());
  if (r.labels.size() != n || r.positions.size() != n || r.lemmas.size() != n) {
    throw Error(ErrorKind::kShape,
                "representation metadata does not match the row count");
  }
  if (!r.rows.allFinite()) {
    throw Error(ErrorKind::kData, "representation rows contain non-finite values");
  }
}

std::size_t CountLabel(const RepresentationSet& reps, NumberLabel label) {
  return static_cast<std::size_t>(
      std::count(reps.labels.begin(), reps.labels.end(), label));
}

double MajorityRate(const RepresentationSet& reps) {
  if (reps.size() == 0) return 0.0;
  const std::size_t sg = CountLabel(reps, NumberLabel::kSingular);
  return static_cast<double>(std::max(sg, reps.size() - sg)) /
         static_cast<double>(reps.size());
}

double PerLemmaMajorityRate(const RepresentationSet& reps) {
  if (reps.size() == 0) return 0.0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    auto& c = counts[reps.lemmas[i]];
    (reps.labels[i] == NumberLabel::kSingular ? c.first : c.second)++;
  }
  std::size_t hits = 0;
  for (const auto& [lemma, c] : counts) hits += std::max(c.first, c.second);
  return static_cast<double>(hits) / static_cast<double>(reps.size());
}

std::vector<RepresentationSet> CollectAllLayers(
    const Model& model, const Dataset& data, Category category,
    const InterventionFn& interventions) {
  if (data.empty()) throw Error(ErrorKind::kData, "dataset is empty");
  const int L = model.config().n_layers;
  const auto d = static_cast<Eigen::Index>(model.config().hidden_dim);
  const Vocabulary& vocab = model.vocab();

  std::vector<RowSource> sources;
  switch (category) {
    case Category::kNoun: sources = {{false, true}}; break;
    case Category::kVerb: sources = {{false, false}}; break;
    case Category::kMaskedVerb: sources = {{true, false}}; break;
    case Category::kMixed: sources = {{false, true}, {false, false}}; break;
  }

  const std::size_t n = data.size();
  // rows_by_source[s][layer] is n x d.
  std::vector<std::vector<RowMatrixF>> rows_by_source(
      sources.size(), std::vector<RowMatrixF>(L + 1, RowMatrixF(n, d)));
  ParallelFor(n, [&](std::size_t i) {
    const AgreementInstance& inst = data[i];
    const std::vector<InterventionSpec> ivs =
        interventions ? interventions(inst) : std::vector<InterventionSpec>{};
    ForwardOptions opts;
    opts.record_attention = false;
    ForwardTrace plain, masked;
    bool have_plain = false, have_masked = false;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const ForwardTrace* tr;
      if (sources[s].masked) {
        if (!have_masked) {
          masked = model.Forward(MaskTarget(vocab, inst), ivs, opts);
          have_masked = true;
        }
        tr = &masked;
      } else {
        if (!have_plain) {
          ValidateInstance(inst);
          plain = model.Forward(vocab.Encode(inst.tokens), ivs, opts);
          have_plain = true;
        }
        tr = &plain;
      }
      const auto pos = static_cast<Eigen::Index>(
          sources[s].at_cue ? inst.cue_index : inst.target_index);
      for (int l = 0; l <= L; ++l) {
        rows_by_source[s][l].row(static_cast<Eigen::Index>(i)) =
            tr->consumed[l].row(pos).cast<float>();
      }
    }
  });

  std::vector<RepresentationSet> out(L + 1);
  for (int l = 0; l <= L; ++l) {
    RepresentationSet& r = out[l];
    r.category = category;
    r.layer = l;
    r.rows.resize(static_cast<Eigen::Index>(n * sources.size()), d);
    Eigen::Index row = 0;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      for (std::size_t i = 0; i < n; ++i, ++row) {
        const AgreementInstance& inst = data[i];
        r.rows.row(row) = rows_by_source[s][l].row(static_cast<Eigen::Index>(i));
        if (sources[s].at_cue) {
          r.labels.push_back(inst.cue_number);
          r.positions.push_back(inst.cue_index);
          r.lemmas.push_back(vocab.LemmaOf(inst.tokens[inst.cue_index]));
        } else {
          r.labels.push_back(inst.target_number);
          r.positions.push_back(inst.target_index);
          r.lemmas.push_back(inst.target_sg_form);
        }
      }
    }
  }
  // Noun and verb halves are equal-sized here (one of each per instance),
  // so the balanced union of the Mixed category keeps every row.
  return out;
}

RepresentationSet CollectRepresentations(const Model& model,
                                         const Dataset& data,
                                         Category category, int layer,
                                         const InterventionFn& interventions) {
  if (layer < 0 || layer > model.config().n_layers) {
    throw Error(ErrorKind::kBounds,
                "layer " + std::to_string(layer) + " outside [0, " +
                    std::to_string(model.config().n_layers) + "]");
  }
  auto all = CollectAllLayers(model, data, category, interventions);
  return std::move(all[layer]);
}

RowSplit SplitByLemma(const RepresentationSet& reps, double dev_frac,
                      std::uint64_t seed) {
  if (!(dev_frac > 0.0 && dev_frac < 1.0)) {
    throw Error(ErrorKind::kConfig, "dev fraction must lie in (0,1)");
  }
  std::map<std::string, std::vector<std::size_t>> by_lemma;
  for (std::size_t i = 0; i < reps.size(); ++i) by_lemma[reps.lemmas[i]].push_back(i);
  if (by_lemma.size() < 2) {
    throw Error(ErrorKind::kData, "lemma split needs at least two lemmas");
  }
  std::vector<std::string> order;
  for (const auto& [lemma, rows] : by_lemma) order.push_back(lemma);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto want = static_cast<std::size_t>(
      std::ceil(dev_frac * static_cast<double>(reps.size())));
  std::set<std::string> dev_lemmas;
  std::size_t taken = 0;
  for (std::size_t k = 0; k + 1 < order.size() && taken < want; ++k) {
    dev_lemmas.insert(order[k]);
    taken += by_lemma[order[k]].size();
  }
  std::vector<std::size_t> train_idx, dev_idx;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    (dev_lemmas.count(reps.lemmas[i]) ? dev_idx : train_idx).push_back(i);
  }
  return {reps.Subset(train_idx), reps.Subset(dev_idx)};
}

RowSplit SplitRows(const RepresentationSet& reps, double dev_frac,
                   std::uint64_t seed) {
  if (!(dev_frac > 0.0 && dev_frac < 1.0)) {
    throw Error(ErrorKind::kConfig, "dev fraction must lie in (0,1)");
  }
  std::vector<std::size_t> idx(reps.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_dev = static_cast<std::size_t>(
      std::llround(dev_frac * static_cast<double>(reps.size())));
  std::vector<std::size_t> dev_idx(idx.begin(), idx.begin() + n_dev);
  std::vector<std::size_t> train_idx(idx.begin() + n_dev, idx.end());
  std::sort(dev_idx.begin(), dev_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  return {reps.Subset(train_idx), reps.Subset(dev_idx)};
}

std::string ManifestPath(const std::string& repr_path) {
  return repr_path + ".json";
}

void SaveRepresentations(const RepresentationSet& reps,
                         const std::string& path) {
  ValidateRepresentations(reps);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
    binio::WriteMagic(out, "REPR");
    binio::WriteU32(out, kReprVersion);
    binio::WriteU32(out, static_cast<std::uint32_t>(reps.dim()));
    binio::WriteU64(out, static_cast<std::uint64_t>(reps.size()));
    binio::WriteF32s(out, std::span<const float>(reps.rows.data(),
                                                 static_cast<std::size_t>(reps.rows.size())));
    if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
  }
  nlohmann::ordered_json m;
  m["layer"] = reps.layer;
  m["category"] = std::string(ToString(reps.category));
  std::vector<std::string> labels;
  for (auto l : reps.labels) labels.emplace_back(ToString(l));
  m["labels"] = labels;
  m["positions"] = reps.positions;
  m["lemmas"] = reps.lemmas;
  binio::WriteFileText(ManifestPath(path), m.dump() + "\n");
}

RepresentationSet LoadRepresentations(const std::string& path) {
  RepresentationSet r;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
    binio::ExpectMagic(in, "REPR", "representation");
    const auto version = binio::ReadU32(in, "representation");
    if (version != kReprVersion) {
      throw Error(ErrorKind::kParse,
                  "unsupported representation version " + std::to_string(version));
    }
    const auto d = binio::ReadU32(in, "representation");
    const auto n = binio::ReadU64(in, "representation");
    r.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    binio::ReadF32s(in, std::span<float>(r.rows.data(),
                                         static_cast<std::size_t>(r.rows.size())),
                    "representation");
  }
  try {
    const auto m = nlohmann::json::parse(binio::ReadFileText(ManifestPath(path)));
    r.layer = m.at("layer").get<int>();
    r.category = ParseCategory(m.at("category").get<std::string>());
    for (const auto& l : m.at("labels")) r.labels.push_back(ParseNumber(l.get<std::string>()));
    r.positions = m.at("positions").get<std::vector<std::size_t>>();
    if (m.contains("lemmas")) {
      r.lemmas = m.at("lemmas").get<std::vector<std::string>>();
    } else {
      r.lemmas.assign(r.labels.size(), std::string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, "representation manifest: " + std::string(e.what()));
  }
  ValidateRepresentations(r);
  return r;
}

}  // namespace uprobe
