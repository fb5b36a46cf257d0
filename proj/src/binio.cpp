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

#include "uprobe/binio.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "uprobe/errors.hpp"

namespace uprobe::binio {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

void Put(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void Get(std::istream& in, void* data, std::size_t n, std::string_view what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(ErrorKind::kParse,
                "truncated " + std::string(what) + " file");
  }
}

}  // namespace

void WriteMagic(std::ostream& out, std::string_view magic) {
  Put(out, magic.data(), magic.size());
}
void WriteU32(std::ostream& out, std::uint32_t v) { Put(out, &v, sizeof v); }
void WriteU64(std::ostream& out, std::uint64_t v) { Put(out, &v, sizeof v); }
void WriteF32(std::ostream& out, float v) { Put(out, &v, sizeof v); }
void WriteF32s(std::ostream& out, std::span<const float> values) {
  Put(out, values.data(), values.size_bytes());
}

void ExpectMagic(std::istream& in, std::string_view magic,
                 std::string_view what) {
  std::array<char, 8> buf{};
  Get(in, buf.data(), magic.size(), what);
  if (std::string_view(buf.data(), magic.size()) != magic) {
    throw Error(ErrorKind::kParse, "bad magic in " + std::string(what) +
                                       " file, expected \"" +
                                       std::string(magic) + "\"");
  }
}

std::uint32_t ReadU32(std::istream& in, std::string_view what) {
  std::uint32_t v;
  Get(in, &v, sizeof v, what);
  return v;
}

std::uint64_t ReadU64(std::istream& in, std::string_view what) {
  std::uint64_t v;
  Get(in, &v, sizeof v, what);
  return v;
}

float ReadF32(std::istream& in, std::string_view what) {
  float v;
  Get(in, &v, sizeof v, what);
  return v;
}

void ReadF32s(std::istream& in, std::span<float> values,
              std::string_view what) {
  Get(in, values.data(), values.size_bytes(), what);
}

std::string ReadRest(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::vector<unsigned char> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

std::string ReadFileText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileText(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace uprobe::binio
