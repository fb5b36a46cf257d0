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

#ifndef UPROBE_ERRORS_HPP_
#define UPROBE_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uprobe {

// Every failure raised by the library derives from Error. The kind tells
// callers (the CLI in particular) whether the input was at fault.
enum class ErrorKind {
  kConfig,
  kParse,
  kValidation,
  kData,
  kShape,
  kDegenerate,
  kIntervention,
  kInput,
  kBounds,
  kTraining,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

  // True when the error stems from user-provided input rather than an
  // internal failure.
  bool is_user_error() const;

 private:
  ErrorKind kind_;
};

// Parse and validation errors on line-oriented files carry the 1-based line.
class LineError : public Error {
 public:
  LineError(ErrorKind kind, std::size_t line, const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Training diverged (non-finite loss) at the given optimizer step.
class TrainingError : public Error {
 public:
  TrainingError(long step, const std::string& message);

  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace uprobe

#endif  // UPROBE_ERRORS_HPP_
