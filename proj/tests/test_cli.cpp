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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "cli_runner.hpp"
#include "helpers.hpp"

using namespace uprobe;
using namespace uprobe::testing;

namespace {

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("cli exit codes") {
  TempDir dir("cli");
  const auto log = dir.path() / "log.txt";
  CHECK(RunCli(dir.path(), {"no-such-command"}, log) == 2);
  CHECK(RunCli(dir.path(), {}, log) == 2);
  CHECK(RunCli(dir.path(), {"train-lm", "--train", "missing.jsonl"}, log) == 2);
  std::ofstream(dir.File("bad.json")) << R"({"train": {"stepz": 3}})";
  CHECK(RunCli(dir.path(), {"--config", "bad.json", "gen-corpus", "--n", "20"}, log) == 2);
  std::ofstream(dir.File("broken.jsonl")) << "{\"tokens\": [\n";
  CHECK(RunCli(dir.path(), {"train-lm", "--train", "broken.jsonl"}, log) == 2);
  CHECK(RunCli(dir.path(), {"--help"}, log) == 0);
}

TEST_CASE("cli writes artifacts and a manifest with the seed") {
  TempDir dir("cli");
  const auto log = dir.path() / "log.txt";
  REQUIRE(RunCli(dir.path(), {"gen-corpus", "--n", "40", "--seed", "9", "--out-dir", "c"}, log) ==
          0);
  for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "gen-corpus.manifest.json"}) {
    CHECK(std::filesystem::exists(dir.path() / "c" / f));
  }
  const auto m = nlohmann::json::parse(Slurp(dir.File("c/gen-corpus.manifest.json")));
  CHECK(m.at("seeds").at("seed") == 9);
  CHECK(m.contains("wall_clock_seconds"));
  // --out only makes sense with a single input.
  std::ofstream(dir.File("tiny.json"))
      << R"({"model": {"n_layers": 1, "hidden_dim": 8, "n_heads": 2, "ffn_dim": 16},
             "train": {"steps": 2, "batch_size": 4}})";
  REQUIRE(RunCli(dir.path(), {"--config", "tiny.json", "train-lm", "--train", "c/train.jsonl",
                              "--out-dir", "lm"},
                 log) == 0);
  REQUIRE(RunCli(dir.path(), {"dump-reps", "--model", "lm/model.bin", "--data", "c/train.jsonl",
                              "--categories", "noun", "--out-dir", "r"},
                 log) == 0);
  CHECK(RunCli(dir.path(), {"inlp", "--reps", "r/noun_l0.repr", "r/noun_l1.repr", "--out",
                            "x.proj"},
               log) == 2);
  CHECK(RunCli(dir.path(), {"dump-reps", "--model", "lm/model.bin", "--data", "c/train.jsonl",
                            "--layers", "5", "--out-dir", "r"},
               log) == 2);
}
