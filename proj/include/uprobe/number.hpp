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

#ifndef UPROBE_NUMBER_HPP_
#define UPROBE_NUMBER_HPP_

#include <string>
#include <string_view>

namespace uprobe {

// Grammatical number. Singular is the positive class for probes.
enum class NumberLabel { kSingular, kPlural };

std::string_view ToString(NumberLabel n);  // "sg" / "pl"
NumberLabel ParseNumber(std::string_view text);  // throws kParse

inline NumberLabel Flip(NumberLabel n) {
  return n == NumberLabel::kSingular ? NumberLabel::kPlural
                                     : NumberLabel::kSingular;
}

inline double AsTarget(NumberLabel n) {
  return n == NumberLabel::kSingular ? 1.0 : 0.0;
}

}  // namespace uprobe

#endif  // UPROBE_NUMBER_HPP_
