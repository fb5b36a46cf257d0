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

#include "uprobe/number.hpp"

#include "uprobe/errors.hpp"

namespace uprobe {

std::string_view ToString(NumberLabel n) {
  return n == NumberLabel::kSingular ? "sg" : "pl";
}

NumberLabel ParseNumber(std::string_view text) {
  if (text == "sg") return NumberLabel::kSingular;
  if (text == "pl") return NumberLabel::kPlural;
  throw Error(ErrorKind::kParse,
              "number label must be \"sg\" or \"pl\", got \"" +
                  std::string(text) + "\"");
}

}  // namespace uprobe
