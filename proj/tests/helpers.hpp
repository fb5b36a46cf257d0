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

#ifndef UPROBE_TESTS_HELPERS_HPP_
#define UPROBE_TESTS_HELPERS_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "uprobe/corpus.hpp"
#include "uprobe/errors.hpp"
#include "uprobe/model.hpp"
#include "uprobe/representations.hpp"

namespace uprobe::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("uprobe_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string File(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// A small untrained model over the default grammar.
inline Model TinyModel(int layers = 2, int d = 16, std::uint64_t seed = 3) {
  ModelConfig cfg;
  cfg.n_layers = layers;
  cfg.hidden_dim = d;
  cfg.n_heads = 2;
  cfg.ffn_dim = 2 * d;
  cfg.seed = seed;
  return Model::Initialize(cfg, Vocabulary::FromGrammar(DefaultGrammar()));
}

// Labelled rows: label singular iff x[0] > 0, with a margin.
inline RepresentationSet SignSet(int n, int d, std::uint64_t seed,
                                 Category c = Category::kNoun) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.f, 1.f);
  RepresentationSet r;
  r.category = c;
  r.rows.resize(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) r.rows(i, j) = normal(rng);
    const bool sg = i % 2 == 0;
    r.rows(i, 0) = (sg ? 1.f : -1.f) * (0.5f + std::abs(r.rows(i, 0)));
    r.labels.push_back(sg ? NumberLabel::kSingular : NumberLabel::kPlural);
    r.positions.push_back(0);
    r.lemmas.push_back("w" + std::to_string(i % 10));
  }
  return r;
}

template <typename Fn>
ErrorKind KindOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::logic_error("expected an uprobe::Error");
}

}  // namespace uprobe::testing

#endif  // UPROBE_TESTS_HELPERS_HPP_
