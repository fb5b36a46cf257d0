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

#include "uprobe/errors.hpp"

namespace uprobe {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kDegenerate: return "degenerate input";
    case ErrorKind::kIntervention: return "intervention error";
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kBounds: return "bounds error";
    case ErrorKind::kTraining: return "training error";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
      kind_(kind) {}

bool Error::is_user_error() const {
  return kind_ != ErrorKind::kTraining;
}

LineError::LineError(ErrorKind kind, std::size_t line,
                     const std::string& message)
    : Error(kind, "line " + std::to_string(line) + ": " + message),
      line_(line) {}

TrainingError::TrainingError(long step, const std::string& message)
    : Error(ErrorKind::kTraining,
            "step " + std::to_string(step) + ": " + message),
      step_(step) {}

}  // namespace uprobe
