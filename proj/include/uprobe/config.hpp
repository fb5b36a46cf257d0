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

#ifndef UPROBE_CONFIG_HPP_
#define UPROBE_CONFIG_HPP_

#include <cstddef>
#include <string>

#include "uprobe/agreement.hpp"
#include "uprobe/amnesic.hpp"
#include "uprobe/corpus.hpp"
#include "uprobe/model.hpp"
#include "uprobe/probes.hpp"
#include "uprobe/training.hpp"

namespace uprobe {

struct CorpusSettings {
  std::size_t n_sentences = 10000;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;
};

// Every hyperparameter the command-line tool uses. JSON keys mirror the
// field names; missing keys keep their defaults. Seeds are not part of the
// file: the tool sets model.seed and probe_split.seed from --seed.
struct ToolConfig {
  CorpusSettings corpus;
  GrammarConfig grammar = DefaultGrammar();
  ModelConfig model;
  TrainSchedule train;
  ProbeHyper probe;
  ProbeSplit probe_split;
  StoppingRule inlp;
  // Training sentences used to build probe and INLP sets (0 = all).
  std::size_t probe_sentences = 4000;
};

// Defaults of the toy pipeline (2 layers, d = 64).
ToolConfig DefaultToolConfig();

// Overlays a JSON object on the defaults. Unknown keys and ill-typed
// values raise Error(kConfig).
ToolConfig ParseToolConfig(const std::string& json_text);

// JSON only; any other extension raises Error(kConfig).
ToolConfig LoadToolConfig(const std::string& path);

// Canonical JSON (fixed key order) covering every field.
std::string ToolConfigToJson(const ToolConfig& config);

}  // namespace uprobe

#endif  // UPROBE_CONFIG_HPP_
