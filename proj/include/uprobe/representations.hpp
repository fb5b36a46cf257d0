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

#ifndef UPROBE_REPRESENTATIONS_HPP_
#define UPROBE_REPRESENTATIONS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "uprobe/corpus.hpp"
#include "uprobe/model.hpp"
#include "uprobe/number.hpp"

namespace uprobe {

// Which token a representation row is read from.
enum class Category { kNoun, kVerb, kMaskedVerb, kMixed };

std::string_view ToString(Category c);  // "noun", "verb", "masked_verb", "mixed"
Category ParseCategory(std::string_view text);

using RowMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// n hidden vectors of dimension d with their number labels. `positions`
// are sentence positions and `lemmas` group rows that come from the same
// lexeme (used for lemma-disjoint splits and per-lemma baselines).
struct RepresentationSet {
  RowMatrixF rows;
  std::vector<NumberLabel> labels;
  std::vector<std::size_t> positions;
  std::vector<std::string> lemmas;
  Category category = Category::kNoun;
  int layer = 0;

  std::size_t size() const { return labels.size(); }
  int dim() const { return static_cast<int>(rows.cols()); }

  // Row subset in the given order.
  RepresentationSet Subset(const std::vector<std::size_t>& idx) const;
};

// Shape/metadata consistency and finite rows; throws Error(kShape) or
// Error(kData).
void ValidateRepresentations(const RepresentationSet& reps);

std::size_t CountLabel(const RepresentationSet& reps, NumberLabel label);
double MajorityRate(const RepresentationSet& reps);
// Share of rows carrying their lemma's majority label.
double PerLemmaMajorityRate(const RepresentationSet& reps);

// Provides the interventions to apply while reading one instance.
using InterventionFn =
    std::function<std::vector<InterventionSpec>(const AgreementInstance&)>;

// Noun: cue position of the unmasked sentence. Verb: target position of the
// unmasked sentence. MaskedVerb: target position after MaskTarget. Mixed:
// Noun and Verb rows, each downsampled to the smaller count.
// With interventions the row is the vector the next layer consumes.
// Throws Error(kData) on an empty dataset and Error(kBounds) for a layer
// outside [0, L].
RepresentationSet CollectRepresentations(const Model& model,
                                         const Dataset& data,
                                         Category category, int layer,
                                         const InterventionFn& interventions = {});

// Same, for every layer 0..L from a single pass per sentence.
std::vector<RepresentationSet> CollectAllLayers(
    const Model& model, const Dataset& data, Category category,
    const InterventionFn& interventions = {});

struct RowSplit {
  RepresentationSet train;
  RepresentationSet dev;
};

// Lemma-disjoint split: whole lemmas go to dev (in seeded order) until dev
// holds at least dev_frac of the rows. Requires at least two lemmas.
RowSplit SplitByLemma(const RepresentationSet& reps, double dev_frac,
                      std::uint64_t seed);

// Plain seeded row split.
RowSplit SplitRows(const RepresentationSet& reps, double dev_frac,
                   std::uint64_t seed);

// REPR binary: "REPR", u32 version, u32 d, u64 n, n*d f32 row-major.
// The manifest ({layer, category, labels, positions, lemmas}) lives next to
// it at ManifestPath(path).
std::string ManifestPath(const std::string& repr_path);
void SaveRepresentations(const RepresentationSet& reps,
                         const std::string& path);
RepresentationSet LoadRepresentations(const std::string& path);

}  // namespace uprobe

#endif  // UPROBE_REPRESENTATIONS_HPP_
