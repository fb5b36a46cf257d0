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

#include "uprobe/attention_mask.hpp"

#include <string>

#include "uprobe/errors.hpp"

namespace uprobe {

std::string_view ToString(MaskKind kind) {
  switch (kind) {
    case MaskKind::kIdentity: return "identity";
    case MaskKind::kTargetToCue: return "target_to_cue";
    case MaskKind::kAllToCue: return "all_to_cue";
  }
  return "identity";
}

MaskKind ParseMaskKind(std::string_view text) {
  if (text == "identity") return MaskKind::kIdentity;
  if (text == "target_to_cue" || text == "target-to-cue") {
    return MaskKind::kTargetToCue;
  }
  if (text == "all_to_cue" || text == "all-to-cue") return MaskKind::kAllToCue;
  throw Error(ErrorKind::kParse, "unknown mask kind \"" + std::string(text) +
                                     "\"");
}

Eigen::MatrixXd BuildMask(const AttentionMaskSpec& spec, std::size_t T) {
  if (spec.cue_position >= T || spec.target_position >= T) {
    throw Error(ErrorKind::kBounds,
                "mask position outside a sequence of length " +
                    std::to_string(T));
  }
  const auto n = static_cast<Eigen::Index>(T);
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(n, n);
  const auto c = static_cast<Eigen::Index>(spec.cue_position);
  const auto t = static_cast<Eigen::Index>(spec.target_position);
  switch (spec.kind) {
    case MaskKind::kIdentity:
      break;
    case MaskKind::kTargetToCue:
      m(t, c) = 0.0;
      break;
    case MaskKind::kAllToCue:
      m.col(c).setZero();
      break;
  }
  return m;
}

}  // namespace uprobe
