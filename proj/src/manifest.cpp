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

#include "uprobe/manifest.hpp"

#include <openssl/evp.h>

#include <json.hpp>

#include "uprobe/binio.hpp"
#include "uprobe/errors.hpp"

namespace uprobe {

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string Sha256File(const std::string& path) {
  const auto bytes = binio::ReadFileBytes(path);
  return Sha256Hex(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                    bytes.size()));
}

void RunManifest::AddInput(const std::string& path) {
  inputs.push_back({path, Sha256File(path)});
}

void RunManifest::AddOutput(const std::string& path) {
  outputs.push_back({path, Sha256File(path)});
}

std::string ManifestToJson(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["arguments"] = m.arguments;
  j["config_hash"] = m.config_hash;
  j["seeds"] = m.seeds;
  j["threads"] = m.threads;
  auto refs = [](const std::vector<ArtifactRef>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& r : v) a.push_back({{"path", r.path}, {"sha256", r.sha256}});
    return a;
  };
  j["inputs"] = refs(m.inputs);
  j["outputs"] = refs(m.outputs);
  j["toolkit_version"] = m.toolkit_version;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  return j.dump(1);
}

void SaveManifest(const RunManifest& m, const std::string& path) {
  binio::WriteFileText(path, ManifestToJson(m) + "\n");
}

}  // namespace uprobe
