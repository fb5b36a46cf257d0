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

#ifndef UPROBE_ATTENTION_MASK_HPP_
#define UPROBE_ATTENTION_MASK_HPP_

#include <cstddef>
#include <string_view>

#include <Eigen/Core>

namespace uprobe {

enum class MaskKind { kIdentity, kTargetToCue, kAllToCue };

std::string_view ToString(MaskKind kind);  // "identity", "target_to_cue", ...
MaskKind ParseMaskKind(std::string_view text);

// Binary mask applied to every head of the transformer blocks
// first_layer..last_layer (0-based block indices, inclusive).
struct AttentionMaskSpec {
  MaskKind kind = MaskKind::kIdentity;
  std::size_t cue_position = 0;
  std::size_t target_position = 0;
  int first_layer = 0;
  int last_layer = 0;
};

// T x T matrix of ones, except:
//   kTargetToCue  entry (target, cue) = 0   (the target stops reading the cue)
//   kAllToCue     column cue = 0            (nobody reads the cue)
// Positions >= T raise Error(kBounds).
Eigen::MatrixXd BuildMask(const AttentionMaskSpec& spec, std::size_t T);

}  // namespace uprobe

#endif  // UPROBE_ATTENTION_MASK_HPP_
