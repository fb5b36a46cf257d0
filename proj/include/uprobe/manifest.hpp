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

#ifndef UPROBE_MANIFEST_HPP_
#define UPROBE_MANIFEST_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace uprobe {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

std::string Sha256Hex(std::string_view bytes);
// Throws Error(kIo) if the file cannot be read.
std::string Sha256File(const std::string& path);

struct ArtifactRef {
  std::string path;
  std::string sha256;
};

// Written next to the artifacts of every command. wall_clock_seconds is
// the only field that varies between identical runs.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string config_hash;  // SHA-256 of the canonical config JSON
  std::map<std::string, std::uint64_t> seeds;
  int threads = 1;
  std::vector<ArtifactRef> inputs;
  std::vector<ArtifactRef> outputs;
  std::string toolkit_version{kToolkitVersion};
  double wall_clock_seconds = 0.0;

  void AddInput(const std::string& path);
  void AddOutput(const std::string& path);
};

std::string ManifestToJson(const RunManifest& m);
void SaveManifest(const RunManifest& m, const std::string& path);

}  // namespace uprobe

#endif  // UPROBE_MANIFEST_HPP_
