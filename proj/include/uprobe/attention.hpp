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

#ifndef UPROBE_ATTENTION_HPP_
#define UPROBE_ATTENTION_HPP_

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "uprobe/agreement.hpp"
#include "uprobe/attention_mask.hpp"
#include "uprobe/corpus.hpp"
#include "uprobe/model.hpp"

namespace uprobe {

// Mask of the given kind over blocks [first, last] at each instance's own
// cue and target positions.
InterventionFn MaskRange(MaskKind kind, int first, int last);

// Cells (i, j), i <= j < L. Entries with i > j hold NaN.
struct RangeSweep {
  MaskKind kind = MaskKind::kIdentity;
  NAResult baseline;
  Eigen::MatrixXd accuracy;  // L x L
  Eigen::MatrixXd drop;      // L x L
  std::vector<std::vector<NAResult>> results;  // [i][j], empty when i > j
};

RangeSweep RunRangeSweep(const Model& model, const Dataset& data, MaskKind kind,
                         const NAResult* baseline = nullptr);

// Per-layer results for the three cut conditions: only block l, blocks
// [l, L-1] and blocks [0, l].
struct Triptych {
  MaskKind kind = MaskKind::kIdentity;
  NAResult baseline;
  std::vector<NAResult> single;
  std::vector<NAResult> upward;
  std::vector<NAResult> downward;

  DistanceTable Table(int condition) const;  // 0 single, 1 upward, 2 downward
};

// Reuses range-sweep cells when given.
Triptych RunTriptych(const Model& model, const Dataset& data, MaskKind kind,
                     const RangeSweep* sweep = nullptr);

}  // namespace uprobe

#endif  // UPROBE_ATTENTION_HPP_
