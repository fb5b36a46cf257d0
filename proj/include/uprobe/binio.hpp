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

#ifndef UPROBE_BINIO_HPP_
#define UPROBE_BINIO_HPP_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Little-endian primitives shared by the checkpoint, REPR and PROJ formats.
namespace uprobe::binio {

void WriteMagic(std::ostream& out, std::string_view magic);
void WriteU32(std::ostream& out, std::uint32_t v);
void WriteU64(std::ostream& out, std::uint64_t v);
void WriteF32(std::ostream& out, float v);
void WriteF32s(std::ostream& out, std::span<const float> values);

// Readers throw Error(kParse) on short reads; `what` names the file kind.
void ExpectMagic(std::istream& in, std::string_view magic,
                 std::string_view what);
std::uint32_t ReadU32(std::istream& in, std::string_view what);
std::uint64_t ReadU64(std::istream& in, std::string_view what);
float ReadF32(std::istream& in, std::string_view what);
void ReadF32s(std::istream& in, std::span<float> values,
              std::string_view what);

// Everything left in the stream (used for JSON trailers).
std::string ReadRest(std::istream& in);

std::vector<unsigned char> ReadFileBytes(const std::string& path);
std::string ReadFileText(const std::string& path);
void WriteFileText(const std::string& path, std::string_view text);

}  // namespace uprobe::binio

#endif  // UPROBE_BINIO_HPP_
