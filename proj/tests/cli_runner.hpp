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

#ifndef UPROBE_TESTS_CLI_RUNNER_HPP_
#define UPROBE_TESTS_CLI_RUNNER_HPP_

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#ifndef UPROBE_CLI_PATH
#error "UPROBE_CLI_PATH must point at the uprobe executable"
#endif

namespace uprobe::testing {

inline std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Runs the tool inside `cwd`, appending its output to `log`. Returns the
// exit status.
inline int RunCli(const std::filesystem::path& cwd, const std::vector<std::string>& args,
                  const std::filesystem::path& log) {
  std::string cmd = "cd " + ShellQuote(cwd.string()) + " && UPROBE_LOG=${UPROBE_LOG:-warn} " +
                    ShellQuote(UPROBE_CLI_PATH);
  for (const auto& a : args) cmd += " " + ShellQuote(a);
  cmd += " >>" + ShellQuote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

}  // namespace uprobe::testing

#endif  // UPROBE_TESTS_CLI_RUNNER_HPP_
