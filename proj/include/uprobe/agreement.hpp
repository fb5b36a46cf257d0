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

#ifndef UPROBE_AGREEMENT_HPP_
#define UPROBE_AGREEMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "uprobe/amnesic.hpp"
#include "uprobe/corpus.hpp"
#include "uprobe/model.hpp"
#include "uprobe/probes.hpp"
#include "uprobe/representations.hpp"

namespace uprobe {

enum class PositionKind { kCue, kTarget };

std::string_view ToString(PositionKind k);  // "cue", "target"
PositionKind ParsePositionKind(std::string_view text);

struct Bucket {
  std::size_t correct = 0;
  std::size_t n = 0;

  double accuracy() const {
    return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  }
};

struct NAResult {
  double accuracy = 0.0;
  std::size_t n = 0;        // scored instances
  std::size_t correct = 0;
  std::size_t ties = 0;     // counted as failures
  std::size_t skipped = 0;  // out-of-vocabulary candidate forms
  double majority = 0.0;    // best constant-number guess on the scored set
  std::map<int, Bucket> per_distance;
  std::map<int, Bucket> per_attractors;
};

// Masks the target, runs the model with the instance's interventions and
// checks that the form agreeing with the cue gets the strictly larger logit.
NAResult NaEval(const Model& model, const Dataset& data,
                const InterventionFn& interventions = {});

struct DropReport {
  NAResult baseline;
  NAResult intervened;
  double drop = 0.0;          // baseline.accuracy - intervened.accuracy
  double majority_gap = 0.0;  // baseline.accuracy - baseline.majority
};

DropReport MakeDrop(const NAResult& baseline, const NAResult& intervened);

// Replaces the representation at the cue or target with composed * r
// after hidden layer `layer`.
InterventionFn ProjectAt(int layer, PositionKind where,
                         const AmnesicProjector& proj);

struct SweepRow {
  int layer = 0;
  Category category = Category::kNoun;
  PositionKind position = PositionKind::kCue;
  int k = 0;
  DropReport amnesic;
  DropReport random_control;  // random projector with the same k
  // Probe accuracy lost on the projector's own representations (filled by
  // callers that have them; NaN otherwise).
  double extractability_loss = std::numeric_limits<double>::quiet_NaN();
  double random_extractability_loss = std::numeric_limits<double>::quiet_NaN();
};

// The random control used for a projector of k directions at `layer`.
AmnesicProjector ControlProjector(int d, int k, std::uint64_t control_seed,
                                  int layer);

// One row per projector layer, each with a random control drawn from
// control_seed and the layer.
std::vector<SweepRow> AmnesicNaSweep(
    const Model& model, const Dataset& data,
    const std::map<int, AmnesicProjector>& projectors, PositionKind where,
    std::uint64_t control_seed, const NAResult* baseline = nullptr);

struct CrossCell {
  Category category = Category::kNoun;  // projector category
  int layer = 0;
  PositionKind position = PositionKind::kCue;
  int k = 0;
  DropReport report;
};

// Every projector applied at every listed position.
std::vector<CrossCell> CrossCategorySweep(
    const Model& model, const Dataset& data,
    const std::map<ProbeKey, AmnesicProjector>& projectors,
    std::span<const PositionKind> positions,
    const NAResult* baseline = nullptr);

// How probe train/dev rows are drawn from a representation set.
struct ProbeSplit {
  bool by_lemma = true;
  double dev_fraction = 0.25;
  std::uint64_t seed = 7;
};

RowSplit MakeSplit(const RepresentationSet& reps, const ProbeSplit& split);

// Dev accuracy of a probe trained on reps with the given split.
double ProbeDevAccuracy(const RepresentationSet& reps, const ProbeSplit& split,
                        const ProbeHyper& hyper = {});

// Dev accuracy on reps minus dev accuracy of a fresh probe on the projected
// reps, with the same split.
double ExtractabilityLoss(const RepresentationSet& reps,
                          const AmnesicProjector& proj, const ProbeSplit& split,
                          const ProbeHyper& hyper = {});

struct InfoLossRow {
  int layer = 0;                     // intervened hidden layer i
  std::vector<double> loss;          // index j in [0, L]; NaN for j < i
  std::vector<double> intervened_accuracy;  // NaN for j < i
};

struct InfoLossMatrix {
  Category probe_category = Category::kMaskedVerb;
  PositionKind position = PositionKind::kTarget;
  Category projector_category = Category::kNoun;
  bool random_control = false;
  std::vector<double> baseline_accuracy;  // per layer j
  std::vector<InfoLossRow> rows;          // one per projector

  // Loss at (i, j); NaN when absent.
  double At(int i, int j) const;
};

// Entry (i, j): accuracy of a fresh probe on layer-j probe_category rows
// without intervention minus that of a fresh probe on rows read while the
// layer-i projector acts at `where`.
InfoLossMatrix ComputeInfoLoss(const Model& model, const Dataset& data,
                               const std::map<int, AmnesicProjector>& projectors,
                               PositionKind where, Category probe_category,
                               const ProbeSplit& split,
                               const ProbeHyper& hyper = {});

// One (final-layer information loss, NA drop) pair per intervention.
struct AlignmentPoint {
  Category category = Category::kNoun;
  PositionKind position = PositionKind::kCue;
  int layer = 0;
  bool random_control = false;
  double info_loss = 0.0;  // loss read at the last hidden layer
  double drop = 0.0;
};

// Pairs each sweep row (and its random control) with the matching
// information-loss matrix by projector category, position and control flag.
// Rows without a matching matrix are left out.
std::vector<AlignmentPoint> AlignmentPoints(
    std::span<const SweepRow> rows, std::span<const InfoLossMatrix> losses);

// Rows = distances present in any column, columns as given.
struct DistanceTable {
  std::vector<std::string> columns;
  std::vector<int> distances;
  // accuracy[c][r]; NaN when column c has no instance at distances[r].
  std::vector<std::vector<double>> accuracy;
  std::vector<std::vector<std::size_t>> counts;
};

DistanceTable DistanceStratified(std::span<const std::string> columns,
                                 std::span<const NAResult> results);

// Throws Error(kDegenerate) when either input is constant and
// Error(kShape) on length mismatch or fewer than two points.
double PearsonCorrelation(std::span<const double> x, std::span<const double> y);

}  // namespace uprobe

#endif  // UPROBE_AGREEMENT_HPP_
