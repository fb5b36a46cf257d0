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

#include "uprobe/config.hpp"

#include <set>

#include <json.hpp>

#include "uprobe/binio.hpp"
#include "uprobe/errors.hpp"

namespace uprobe {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) {
      throw Error(ErrorKind::kConfig, "config section \"" + name_ + "\" must be an object");
    }
  }

  template <typename T>
  void Get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kConfig, "config key " + name_ + "." + key + ": " + e.what());
    }
  }

  const json* Child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw Error(ErrorKind::kConfig,
                    "unknown config key " + (name_.empty() ? key : name_ + "." + key));
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void ReadLexemes(const json& j, std::vector<Lexeme>& out, const char* what) {
  try {
    out.clear();
    for (const auto& e : j) {
      out.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig,
                std::string("grammar.") + what + " must be [sg, pl] pairs: " + e.what());
  }
}

ordered_json LexemesJson(const std::vector<Lexeme>& v) {
  ordered_json a = ordered_json::array();
  for (const auto& l : v) a.push_back({l.sg, l.pl});
  return a;
}

}  // namespace

ToolConfig DefaultToolConfig() {
  ToolConfig c;
  c.train.steps = 6000;
  c.train.target_mask_prob = 1.0;
  c.train.weight_decay = 0.1;
  c.train.key_dropout = 0.15;
  c.train.key_dropout_zero_fraction = 0.5;
  return c;
}

ToolConfig ParseToolConfig(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  ToolConfig c = DefaultToolConfig();
  Section top(root, "");
  if (const json* j = top.Child("corpus")) {
    Section s(*j, "corpus");
    s.Get("n_sentences", c.corpus.n_sentences);
    s.Get("train_fraction", c.corpus.train_fraction);
    s.Get("dev_fraction", c.corpus.dev_fraction);
    s.Finish();
  }
  if (const json* j = top.Child("grammar")) {
    Section s(*j, "grammar");
    if (const json* n = s.Child("nouns")) ReadLexemes(*n, c.grammar.nouns, "nouns");
    if (const json* v = s.Child("verbs")) ReadLexemes(*v, c.grammar.verbs, "verbs");
    s.Get("adjectives", c.grammar.adjectives);
    s.Get("adverbs", c.grammar.adverbs);
    s.Get("prepositions", c.grammar.prepositions);
    s.Get("templates", c.grammar.templates);
    s.Get("max_attractors", c.grammar.max_attractors);
    s.Finish();
  }
  if (const json* j = top.Child("model")) {
    Section s(*j, "model");
    s.Get("n_layers", c.model.n_layers);
    s.Get("n_heads", c.model.n_heads);
    s.Get("hidden_dim", c.model.hidden_dim);
    s.Get("ffn_dim", c.model.ffn_dim);
    s.Get("max_seq_len", c.model.max_seq_len);
    std::string mode(ToString(c.model.mask_mode));
    s.Get("mask_mode", mode);
    try {
      c.model.mask_mode = ParseMaskMode(mode);
    } catch (const Error& e) {
      throw Error(ErrorKind::kConfig, e.what());
    }
    s.Finish();
    // The vocabulary size is only known once a corpus is read.
    ModelConfig sized = c.model;
    sized.vocab_size = sized.mask_token_id + 1;
    ValidateModelConfig(sized);
  }
  if (const json* j = top.Child("train")) {
    Section s(*j, "train");
    s.Get("steps", c.train.steps);
    s.Get("batch_size", c.train.batch_size);
    s.Get("learning_rate", c.train.learning_rate);
    s.Get("warmup_fraction", c.train.warmup_fraction);
    s.Get("weight_decay", c.train.weight_decay);
    s.Get("grad_clip", c.train.grad_clip);
    s.Get("mask_prob", c.train.mask_prob);
    s.Get("target_mask_prob", c.train.target_mask_prob);
    s.Get("attention_dropout", c.train.attention_dropout);
    s.Get("key_dropout", c.train.key_dropout);
    s.Get("key_dropout_zero_fraction", c.train.key_dropout_zero_fraction);
    s.Get("log_every", c.train.log_every);
    s.Finish();
  }
  if (const json* j = top.Child("probe")) {
    Section s(*j, "probe");
    s.Get("max_iterations", c.probe.max_iterations);
    s.Get("grad_tol", c.probe.grad_tol);
    s.Finish();
  }
  if (const json* j = top.Child("probe_split")) {
    Section s(*j, "probe_split");
    s.Get("by_lemma", c.probe_split.by_lemma);
    s.Get("dev_fraction", c.probe_split.dev_fraction);
    s.Finish();
  }
  if (const json* j = top.Child("inlp")) {
    Section s(*j, "inlp");
    s.Get("eps", c.inlp.eps);
    s.Get("max_iterations", c.inlp.max_iterations);
    s.Finish();
  }
  top.Get("probe_sentences", c.probe_sentences);
  top.Finish();

  ValidateGrammar(c.grammar);
  ValidateSchedule(c.train);
  if (c.probe.max_iterations <= 0 || !(c.probe.grad_tol > 0.0)) {
    throw Error(ErrorKind::kConfig, "probe.max_iterations and probe.grad_tol must be positive");
  }
  if (!(c.probe_split.dev_fraction > 0.0 && c.probe_split.dev_fraction < 1.0)) {
    throw Error(ErrorKind::kConfig, "probe_split.dev_fraction must lie in (0,1)");
  }
  if (c.inlp.max_iterations < 0 || c.inlp.eps < 0.0) {
    throw Error(ErrorKind::kConfig, "inlp.eps and inlp.max_iterations must be non-negative");
  }
  if (c.corpus.n_sentences == 0) {
    throw Error(ErrorKind::kConfig, "corpus.n_sentences must be positive");
  }
  return c;
}

ToolConfig LoadToolConfig(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext != ".json") {
    throw Error(ErrorKind::kConfig,
                "config files must be JSON (.json); got \"" + path + "\"");
  }
  return ParseToolConfig(binio::ReadFileText(path));
}

std::string ToolConfigToJson(const ToolConfig& c) {
  ordered_json j;
  j["corpus"] = {{"n_sentences", c.corpus.n_sentences},
                 {"train_fraction", c.corpus.train_fraction},
                 {"dev_fraction", c.corpus.dev_fraction}};
  ordered_json g;
  g["nouns"] = LexemesJson(c.grammar.nouns);
  g["verbs"] = LexemesJson(c.grammar.verbs);
  g["adjectives"] = c.grammar.adjectives;
  g["adverbs"] = c.grammar.adverbs;
  g["prepositions"] = c.grammar.prepositions;
  g["templates"] = c.grammar.templates;
  g["max_attractors"] = c.grammar.max_attractors;
  j["grammar"] = g;
  ordered_json m;
  m["n_layers"] = c.model.n_layers;
  m["n_heads"] = c.model.n_heads;
  m["hidden_dim"] = c.model.hidden_dim;
  m["ffn_dim"] = c.model.ffn_dim;
  m["max_seq_len"] = c.model.max_seq_len;
  m["mask_mode"] = std::string(ToString(c.model.mask_mode));
  j["model"] = m;
  ordered_json t;
  t["steps"] = c.train.steps;
  t["batch_size"] = c.train.batch_size;
  t["learning_rate"] = c.train.learning_rate;
  t["warmup_fraction"] = c.train.warmup_fraction;
  t["weight_decay"] = c.train.weight_decay;
  t["grad_clip"] = c.train.grad_clip;
  t["mask_prob"] = c.train.mask_prob;
  t["target_mask_prob"] = c.train.target_mask_prob;
  t["attention_dropout"] = c.train.attention_dropout;
  t["key_dropout"] = c.train.key_dropout;
  t["key_dropout_zero_fraction"] = c.train.key_dropout_zero_fraction;
  t["log_every"] = c.train.log_every;
  j["train"] = t;
  j["probe"] = {{"max_iterations", c.probe.max_iterations},
                {"grad_tol", c.probe.grad_tol}};
  j["probe_split"] = {{"by_lemma", c.probe_split.by_lemma},
                      {"dev_fraction", c.probe_split.dev_fraction}};
  j["inlp"] = {{"eps", c.inlp.eps}, {"max_iterations", c.inlp.max_iterations}};
  j["probe_sentences"] = c.probe_sentences;
  return j.dump();
}

}  // namespace uprobe
