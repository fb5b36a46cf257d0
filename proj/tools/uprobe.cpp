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

// uprobe: command-line front end of the probing workbench.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "uprobe/agreement.hpp"
#include "uprobe/amnesic.hpp"
#include "uprobe/attention.hpp"
#include "uprobe/binio.hpp"
#include "uprobe/config.hpp"
#include "uprobe/corpus.hpp"
#include "uprobe/errors.hpp"
#include "uprobe/manifest.hpp"
#include "uprobe/model.hpp"
#include "uprobe/parallel.hpp"
#include "uprobe/probes.hpp"
#include "uprobe/report.hpp"
#include "uprobe/representations.hpp"
#include "uprobe/training.hpp"

namespace fs = std::filesystem;
using namespace uprobe;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string config_path;
  int threads = 1;
  std::string out_dir = ".";
};

// Collects outputs and writes the manifest when the command finishes.
class Run {
 public:
  Run(std::string command, const Globals& g, const ToolConfig& config,
      std::vector<std::string> args)
      : g_(g), start_(std::chrono::steady_clock::now()) {
    m_.command = std::move(command);
    m_.arguments = std::move(args);
    m_.config_hash = Sha256Hex(ToolConfigToJson(config));
    m_.seeds["seed"] = g.seed;
    m_.threads = g.threads;
    if (!g.config_path.empty()) m_.AddInput(g.config_path);
    fs::create_directories(g.out_dir);
  }

  std::string Out(const std::string& name) const {
    return (fs::path(g_.out_dir) / name).string();
  }

  void Input(const std::string& path) { m_.AddInput(path); }
  void Inputs(const std::vector<std::string>& paths) {
    for (const auto& p : paths) m_.AddInput(p);
  }

  // Registers a file the command already wrote.
  void Output(const std::string& path) { m_.AddOutput(path); }

  void WriteText(const std::string& name, const std::string& text) {
    const std::string path = Out(name);
    binio::WriteFileText(path, text);
    Output(path);
  }

  void Finish() {
    m_.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    SaveManifest(m_, Out(m_.command + ".manifest.json"));
    spdlog::info("{}: wrote {} artifact(s) to {}", m_.command, m_.outputs.size(),
                 g_.out_dir);
  }

 private:
  const Globals& g_;
  RunManifest m_;
  std::chrono::steady_clock::time_point start_;
};

std::string ReprName(Category c, int layer) {
  return std::string(ToString(c)) + "_l" + std::to_string(layer);
}

std::string CategoryTitle(Category c) {
  switch (c) {
    case Category::kNoun: return "Nouns";
    case Category::kVerb: return "Verbs";
    case Category::kMaskedVerb: return "Masked Verbs";
    case Category::kMixed: return "Mixed";
  }
  return "Nouns";
}

Dataset Head(const Dataset& data, std::size_t limit) {
  if (limit == 0 || limit >= data.size()) return data;
  return Dataset(data.begin(), data.begin() + static_cast<long>(limit));
}

std::vector<AmnesicProjector> LoadProjectors(const std::vector<std::string>& paths) {
  std::vector<AmnesicProjector> out;
  for (const auto& p : paths) out.push_back(LoadProjector(p));
  return out;
}

Model WithMaskMode(const Model& m, const std::string& mode) {
  if (mode.empty()) return m;
  ModelConfig cfg = m.config();
  cfg.mask_mode = ParseMaskMode(mode);
  return Model(cfg, m.vocab(), m.params());
}


// ---------------------------------------------------------------- commands

void GenCorpus(const Globals& g, const ToolConfig& cfg, std::size_t n, Run& run) {
  const std::size_t count = n ? n : cfg.corpus.n_sentences;
  const Dataset data = GenerateCorpus(cfg.grammar, count, g.seed);
  const DatasetSplit split =
      Split(data, cfg.corpus.train_fraction, cfg.corpus.dev_fraction, g.seed);
  auto save = [&](const std::string& name, const Dataset& d) {
    SaveDataset(run.Out(name), d);
    run.Output(run.Out(name));
  };
  save("corpus.jsonl", data);
  save("train.jsonl", split.train);
  save("dev.jsonl", split.dev);
  save("test.jsonl", split.test);
  const LabelStats st = ComputeLabelStats(data);
  nlohmann::ordered_json j;
  j["n"] = st.n;
  j["singular"] = st.singular;
  j["plural"] = st.plural;
  j["majority_rate"] = st.majority_rate;
  j["by_attractors"] = st.by_attractors;
  nlohmann::ordered_json dist;
  for (const auto& [d, c] : st.by_distance) dist[std::to_string(d)] = c;
  j["by_distance"] = dist;
  j["splits"] = {{"train", split.train.size()},
                 {"dev", split.dev.size()},
                 {"test", split.test.size()}};
  run.WriteText("corpus_stats.json", j.dump(1) + "\n");
}

void TrainLm(const Globals& g, ToolConfig cfg, const std::string& train_path,
             const std::string& dev_path, long steps, Run& run) {
  const Dataset train = LoadDataset(train_path);
  run.Input(train_path);
  Dataset dev;
  if (!dev_path.empty()) {
    dev = LoadDataset(dev_path);
    run.Input(dev_path);
  }
  Dataset all = train;
  all.insert(all.end(), dev.begin(), dev.end());
  const Vocabulary vocab = Vocabulary::FromDataset(all);
  ModelConfig mc = cfg.model;
  mc.vocab_size = vocab.size();
  mc.seed = g.seed;
  if (steps >= 0) cfg.train.steps = steps;
  TrainReport report;
  const Model model = TrainMlm(mc, vocab, train, dev, cfg.train, &report);
  SaveModel(model, run.Out("model.bin"));
  run.Output(run.Out("model.bin"));
  nlohmann::ordered_json j;
  j["steps"] = report.steps;
  j["final_loss"] = report.final_loss;
  j["dev_loss"] = report.dev_loss;
  j["dev_perplexity"] = report.dev_perplexity;
  j["loss_curve"] = report.loss_curve;
  j["parameters"] = ParameterCount(model.params());
  if (!dev.empty()) {
    const NAResult na = NaEval(model, dev);
    j["dev_na_accuracy"] = na.accuracy;
    spdlog::info("dev NA accuracy {:.4f} over {} instances", na.accuracy, na.n);
  }
  run.WriteText("train_report.json", j.dump(1) + "\n");
}

void DumpReps(const ToolConfig& cfg, const std::string& model_path,
              const std::string& data_path, const std::vector<std::string>& categories,
              std::vector<int> layers, long limit, Run& run) {
  const Model model = LoadModel(model_path);
  run.Input(model_path);
  const Dataset data =
      Head(LoadDataset(data_path), limit >= 0 ? static_cast<std::size_t>(limit)
                                              : cfg.probe_sentences);
  run.Input(data_path);
  const int L = model.config().n_layers;
  if (layers.empty()) {
    for (int l = 0; l <= L; ++l) layers.push_back(l);
  }
  for (int l : layers) {
    if (l < 0 || l > L) {
      throw Error(ErrorKind::kBounds, "layer " + std::to_string(l) +
                                          " outside [0, " + std::to_string(L) + "]");
    }
  }
  for (const auto& name : categories) {
    const Category c = ParseCategory(name);
    const auto all = CollectAllLayers(model, data, c);
    for (int l : layers) {
      const std::string path = run.Out(ReprName(c, l) + ".repr");
      SaveRepresentations(all[l], path);
      run.Output(path);
      run.Output(ManifestPath(path));
    }
  }
}

void TrainProbes(const Globals& g, const ToolConfig& cfg,
                 const std::vector<std::string>& reps_paths, Run& run) {
  ProbeSplit split = cfg.probe_split;
  split.seed = g.seed;
  std::vector<ProbeReportRow> rows;
  std::vector<std::pair<ProbeKey, ProbeParams>> probes(reps_paths.size());
  std::vector<VInformation> infos(reps_paths.size());
  std::vector<RepresentationSet> sets;
  for (const auto& p : reps_paths) {
    sets.push_back(LoadRepresentations(p));
    run.Input(p);
  }
  ParallelFor(sets.size(), [&](std::size_t i) {
    const RowSplit s = MakeSplit(sets[i], split);
    const ProbeParams probe = TrainProbe(s.train, s.dev, cfg.probe);
    probes[i] = {{sets[i].category, sets[i].layer}, probe};
    infos[i] = ComputeVInformation(probe, s.dev);
  });
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& [key, probe] = probes[i];
    const std::string path = run.Out("probe_" + ReprName(key.first, key.second) + ".json");
    SaveProbe(probe, path);
    run.Output(path);
    rows.push_back({key.first, key.second, infos[i]});
    if (!probe.converged) {
      spdlog::warn("probe {} stopped after {} iterations without meeting the "
                   "gradient tolerance", ReprName(key.first, key.second),
                   probe.iterations);
    }
  }
  run.WriteText("probes.csv", ProbeReportCsv(rows));
}

void Cosine(const std::vector<std::string>& probe_paths, Run& run) {
  std::vector<ProbeParams> probes;
  std::vector<std::string> labels;
  for (const auto& p : probe_paths) {
    probes.push_back(LoadProbe(p));
    run.Input(p);
    labels.push_back(ReprName(probes.back().category, probes.back().layer));
  }
  run.WriteText("cosine.csv", CosineCsv(labels, CosineMatrix(probes)));
}

void CrossEval(const Globals& g, const ToolConfig& cfg,
               const std::vector<std::string>& probe_paths,
               const std::vector<std::string>& reps_paths, Run& run) {
  ProbeSplit split = cfg.probe_split;
  split.seed = g.seed;
  std::map<ProbeKey, ProbeParams> probes;
  for (const auto& p : probe_paths) {
    ProbeParams pr = LoadProbe(p);
    run.Input(p);
    probes[{pr.category, pr.layer}] = std::move(pr);
  }
  std::map<ProbeKey, RepresentationSet> sets;
  for (const auto& p : reps_paths) {
    RepresentationSet r = LoadRepresentations(p);
    run.Input(p);
    // Held-out rows of the same split the probes were trained with.
    sets[{r.category, r.layer}] = MakeSplit(r, split).dev;
  }
  run.WriteText("cross_eval.csv", CrossEvalCsv(CrossEvaluate(probes, sets)));
}

void RunInlp(const Globals& g, const ToolConfig& cfg,
             const std::vector<std::string>& reps_paths, const std::string& out,
             Run& run) {
  if (!out.empty() && reps_paths.size() != 1) {
    throw Error(ErrorKind::kConfig, "--out needs exactly one --reps file");
  }
  ProbeSplit split = cfg.probe_split;
  split.seed = g.seed;
  std::string summary = "category,layer,k,stop_reason,majority,final_dev_accuracy\n";
  for (const auto& p : reps_paths) {
    const RepresentationSet reps = LoadRepresentations(p);
    run.Input(p);
    const RowSplit s = MakeSplit(reps, split);
    const AmnesicProjector proj = Inlp(s.train, s.dev, cfg.inlp, cfg.probe);
    if (proj.stop_reason == StopReason::kCap) {
      spdlog::warn("INLP on {} stopped at the iteration cap", p);
    }
    const std::string path =
        out.empty() ? run.Out(ReprName(reps.category, reps.layer) + ".proj") : out;
    SaveProjector(proj, path);
    run.Output(path);
    summary += std::string(ToString(reps.category)) + "," + std::to_string(reps.layer) +
               "," + std::to_string(proj.k()) + "," +
               std::string(ToString(proj.stop_reason)) + "," +
               FormatNumber(proj.majority) + "," +
               FormatNumber(proj.dev_accuracies.back()) + "\n";
  }
  run.WriteText("inlp.csv", summary);
}

void AmnesicSweep(const Globals& g, const ToolConfig& cfg,
                  const std::string& model_path, const std::string& data_path,
                  const std::vector<std::string>& proj_paths,
                  const std::string& position, const std::vector<std::string>& reps_paths,
                  Run& run) {
  const Model model = LoadModel(model_path);
  run.Input(model_path);
  const Dataset data = LoadDataset(data_path);
  run.Input(data_path);
  run.Inputs(proj_paths);
  run.Inputs(reps_paths);
  const PositionKind where = ParsePositionKind(position);
  std::map<Category, std::map<int, AmnesicProjector>> by_cat;
  for (auto& p : LoadProjectors(proj_paths)) by_cat[p.category][p.layer] = std::move(p);
  std::map<ProbeKey, RepresentationSet> reps;
  for (const auto& p : reps_paths) {
    RepresentationSet r = LoadRepresentations(p);
    reps[{r.category, r.layer}] = std::move(r);
  }
  ProbeSplit split = cfg.probe_split;
  split.seed = g.seed;
  const NAResult base = NaEval(model, data);
  for (const auto& [cat, projs] : by_cat) {
    std::vector<SweepRow> rows = AmnesicNaSweep(model, data, projs, where, g.seed, &base);
    for (auto& r : rows) {
      auto it = reps.find({cat, r.layer});
      if (it == reps.end()) continue;
      r.extractability_loss =
          ExtractabilityLoss(it->second, projs.at(r.layer), split, cfg.probe);
      r.random_extractability_loss = ExtractabilityLoss(
          it->second,
          ControlProjector(model.config().hidden_dim, r.k, g.seed, r.layer), split,
          cfg.probe);
    }
    const std::string stem =
        "sweep_" + std::string(ToString(cat)) + "_" + std::string(ToString(where));
    run.WriteText(stem + ".csv", SweepCsv(rows));
    run.WriteText(stem + ".json", SweepJson(rows) + "\n");
  }
}

void CrossSweep(const std::string& model_path, const std::string& data_path,
                const std::vector<std::string>& proj_paths, Run& run) {
  const Model model = LoadModel(model_path);
  run.Input(model_path);
  const Dataset data = LoadDataset(data_path);
  run.Input(data_path);
  run.Inputs(proj_paths);
  std::map<ProbeKey, AmnesicProjector> projs;
  for (auto& p : LoadProjectors(proj_paths)) {
    const ProbeKey key{p.category, p.layer};
    projs[key] = std::move(p);
  }
  const PositionKind positions[] = {PositionKind::kCue, PositionKind::kTarget};
  run.WriteText("cross_sweep.csv",
                CrossSweepCsv(CrossCategorySweep(model, data, projs, positions)));
}

void InfoLoss(const Globals& g, const ToolConfig& cfg, const std::string& model_path,
              const std::string& data_path, const std::vector<std::string>& proj_paths,
              const std::string& position, const std::string& probe_category,
              bool with_random, Run& run) {
  const Model model = LoadModel(model_path);
  run.Input(model_path);
  const Dataset data = LoadDataset(data_path);
  run.Input(data_path);
  run.Inputs(proj_paths);
  const PositionKind where = ParsePositionKind(position);
  const Category probe_cat = ParseCategory(probe_category);
  ProbeSplit split = cfg.probe_split;
  split.seed = g.seed;
  std::map<Category, std::map<int, AmnesicProjector>> by_cat;
  for (auto& p : LoadProjectors(proj_paths)) by_cat[p.category][p.layer] = std::move(p);
  for (const auto& [cat, projs] : by_cat) {
    const std::string stem =
        "info_loss_" + std::string(ToString(cat)) + "_" + std::string(ToString(where));
    const InfoLossMatrix m =
        ComputeInfoLoss(model, data, projs, where, probe_cat, split, cfg.probe);
    run.WriteText(stem + ".csv", InfoLossCsv(m));
    run.WriteText(stem + ".json", InfoLossJson(m) + "\n");
    if (!with_random) continue;
    std::map<int, AmnesicProjector> controls;
    for (const auto& [layer, p] : projs) {
      AmnesicProjector c =
          ControlProjector(model.config().hidden_dim, p.k(), g.seed, layer);
      c.category = cat;
      controls[layer] = std::move(c);
    }
    const InfoLossMatrix r =
        ComputeInfoLoss(model, data, controls, where, probe_cat, split, cfg.probe);
    run.WriteText(stem + "_random.csv", InfoLossCsv(r));
    run.WriteText(stem + "_random.json", InfoLossJson(r) + "\n");
  }
}

std::vector<MaskKind> ParseKinds(const std::vector<std::string>& names) {
  std::vector<MaskKind> kinds;
  for (const auto& n : names) kinds.push_back(ParseMaskKind(n));
  return kinds;
}

void AttnSweep(const std::string& model_path, const std::string& data_path,
               const std::vector<std::string>& kinds, const std::string& mask_mode,
               Run& run) {
  const Model model = WithMaskMode(LoadModel(model_path), mask_mode);
  run.Input(model_path);
  const Dataset data = LoadDataset(data_path);
  run.Input(data_path);
  const NAResult base = NaEval(model, data);
  std::vector<RangeSweep> sweeps;
  for (MaskKind k : ParseKinds(kinds)) sweeps.push_back(RunRangeSweep(model, data, k, &base));
  run.WriteText("attention.csv", AttentionCsv(sweeps));
  run.WriteText("attention.json", AttentionJson(sweeps) + "\n");
}

void Distance(const std::string& model_path, const std::string& data_path,
              const std::vector<std::string>& kinds, const std::string& mask_mode,
              Run& run) {
  const Model model = WithMaskMode(LoadModel(model_path), mask_mode);
  run.Input(model_path);
  const Dataset data = LoadDataset(data_path);
  run.Input(data_path);
  static const char* kConditions[] = {"single", "upward", "downward"};
  for (MaskKind k : ParseKinds(kinds)) {
    const Triptych t = RunTriptych(model, data, k);
    for (int c = 0; c < 3; ++c) {
      run.WriteText("distance_" + std::string(ToString(k)) + "_" + kConditions[c] + ".csv",
                    DistanceCsv(t.Table(c)));
    }
  }
}

void Report(const std::string& kind, const std::vector<std::string>& sweep_paths,
            const std::vector<std::string>& loss_paths, Run& run) {
  std::vector<SweepRow> rows;
  for (const auto& p : sweep_paths) {
    auto r = SweepFromJson(binio::ReadFileText(p));
    run.Input(p);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (kind == "table2") {
    std::map<Category, Table2Block> blocks;
    for (const auto& r : rows) {
      blocks[r.category].title = CategoryTitle(r.category);
      blocks[r.category].rows.push_back(r);
    }
    // Masked verbs first, as in the usual presentation.
    std::vector<Table2Block> ordered;
    for (Category c : {Category::kMaskedVerb, Category::kNoun, Category::kVerb,
                       Category::kMixed}) {
      if (blocks.count(c)) ordered.push_back(blocks[c]);
    }
    run.WriteText("table2.csv", Table2Csv(ordered));
    run.WriteText("table2.json", Table2Json(ordered) + "\n");
  } else if (kind == "alignment") {
    std::vector<InfoLossMatrix> losses;
    for (const auto& p : loss_paths) {
      losses.push_back(InfoLossFromJson(binio::ReadFileText(p)));
      run.Input(p);
    }
    const auto points = AlignmentPoints(rows, losses);
    nlohmann::ordered_json j;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    std::vector<double> x, y;
    for (const auto& p : points) {
      arr.push_back({{"category", std::string(ToString(p.category))},
                     {"position_kind", std::string(ToString(p.position))},
                     {"layer", p.layer},
                     {"random_control", p.random_control},
                     {"info_loss", p.info_loss},
                     {"drop", p.drop}});
      x.push_back(p.info_loss);
      y.push_back(p.drop);
    }
    j["points"] = arr;
    j["pearson"] = nullptr;
    try {
      j["pearson"] = PearsonCorrelation(x, y);
    } catch (const Error& e) {
      spdlog::warn("no correlation reported: {}", e.what());
    }
    run.WriteText("alignment.json", j.dump(1) + "\n");
  } else {
    throw Error(ErrorKind::kConfig, "unknown report kind \"" + kind +
                                        "\" (expected table2 or alignment)");
  }
}

void ConfigureLogging() {
  auto logger = spdlog::stderr_color_mt("uprobe");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("UPROBE_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
  ConfigureLogging();
  CLI::App app{"usage-based probing workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "seed for every random choice")->capture_default_str();
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--threads", g.threads, "worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "directory for artifacts")->capture_default_str();

  std::string model, data, train, dev, position, out, probe_category = "masked_verb",
                                                       kind, mask_mode;
  std::vector<std::string> reps, probes, projs, sweeps, losses;
  std::vector<std::string> categories{"noun", "verb", "masked_verb", "mixed"};
  std::vector<std::string> kinds{"target_to_cue", "all_to_cue"};
  std::vector<int> layers;
  std::size_t n = 0;
  long steps = -1, limit = -1;
  double eps = -1.0;
  int max_iter = -1;
  bool with_random = false;

  auto* gen = app.add_subcommand("gen-corpus", "generate and split a synthetic corpus");
  gen->add_option("--n", n, "number of sentences (default from config)");

  auto* tlm = app.add_subcommand("train-lm", "train the masked language model");
  tlm->add_option("--train", train, "training JSONL")->required()->check(CLI::ExistingFile);
  tlm->add_option("--dev", dev, "dev JSONL")->check(CLI::ExistingFile);
  tlm->add_option("--steps", steps, "override the configured step count");

  auto* dump = app.add_subcommand("dump-reps", "write REPR files per category and layer");
  dump->add_option("--model", model)->required()->check(CLI::ExistingFile);
  dump->add_option("--data", data)->required()->check(CLI::ExistingFile);
  dump->add_option("--categories", categories)->delimiter(',');
  dump->add_option("--layers", layers)->delimiter(',');
  dump->add_option("--limit", limit, "sentences to read (0 = all; default from config)");

  auto* tp = app.add_subcommand("train-probes", "train linear probes and report V-information");
  tp->add_option("--reps", reps)->required()->check(CLI::ExistingFile);

  auto* cos = app.add_subcommand("cosine", "cosine similarity between probe directions");
  cos->add_option("--probes", probes)->required()->check(CLI::ExistingFile);

  auto* ce = app.add_subcommand("cross-eval", "evaluate every probe on every set of its layer");
  ce->add_option("--probes", probes)->required()->check(CLI::ExistingFile);
  ce->add_option("--reps", reps)->required()->check(CLI::ExistingFile);

  auto* inlp = app.add_subcommand("inlp", "iterative nullspace projection");
  inlp->add_option("--reps", reps)->required()->check(CLI::ExistingFile);
  inlp->add_option("--out", out, "projector path (single input only)");
  inlp->add_option("--eps", eps, "stop once dev accuracy <= majority + eps");
  inlp->add_option("--max-iter", max_iter, "direction cap");

  auto* as = app.add_subcommand("amnesic-sweep", "NA drop of amnesic projections per layer");
  as->add_option("--model", model)->required()->check(CLI::ExistingFile);
  as->add_option("--data", data)->required()->check(CLI::ExistingFile);
  as->add_option("--proj", projs)->required()->check(CLI::ExistingFile);
  as->add_option("--position", position)->required()->check(CLI::IsMember({"cue", "target"}));
  as->add_option("--reps", reps, "representations for the extractability loss")
      ->check(CLI::ExistingFile);

  auto* cs = app.add_subcommand("cross-sweep", "apply every projector at cue and target");
  cs->add_option("--model", model)->required()->check(CLI::ExistingFile);
  cs->add_option("--data", data)->required()->check(CLI::ExistingFile);
  cs->add_option("--proj", projs)->required()->check(CLI::ExistingFile);

  auto* il = app.add_subcommand("info-loss", "probe accuracy lost downstream of an intervention");
  il->add_option("--model", model)->required()->check(CLI::ExistingFile);
  il->add_option("--data", data)->required()->check(CLI::ExistingFile);
  il->add_option("--proj", projs)->required()->check(CLI::ExistingFile);
  il->add_option("--position", position)->required()->check(CLI::IsMember({"cue", "target"}));
  il->add_option("--probe-category", probe_category)->capture_default_str();
  il->add_flag("--random", with_random, "also run random-direction controls");

  auto* at = app.add_subcommand("attn-sweep", "attention cuts over all layer ranges");
  at->add_option("--model", model)->required()->check(CLI::ExistingFile);
  at->add_option("--data", data)->required()->check(CLI::ExistingFile);
  at->add_option("--kinds", kinds)->delimiter(',');
  at->add_option("--mask-mode", mask_mode, "post_softmax, post_softmax_renormalize or pre_softmax");

  auto* dist = app.add_subcommand("distance", "distance-stratified attention cuts");
  dist->add_option("--model", model)->required()->check(CLI::ExistingFile);
  dist->add_option("--data", data)->required()->check(CLI::ExistingFile);
  dist->add_option("--kinds", kinds)->delimiter(',');
  dist->add_option("--mask-mode", mask_mode);

  auto* rep = app.add_subcommand("report", "assemble summary tables");
  rep->add_option("--kind", kind)->required()->check(CLI::IsMember({"table2", "alignment"}));
  rep->add_option("--sweeps", sweeps)->required()->check(CLI::ExistingFile);
  rep->add_option("--info-loss", losses)->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    SetMaxThreads(g.threads);
    ToolConfig cfg = g.config_path.empty() ? DefaultToolConfig() : LoadToolConfig(g.config_path);
    cfg.model.seed = g.seed;
    cfg.probe_split.seed = g.seed;
    if (eps >= 0.0) cfg.inlp.eps = eps;
    if (max_iter >= 0) cfg.inlp.max_iterations = max_iter;

    CLI::App* sub = app.get_subcommands().front();
    Run run(sub->get_name(), g, cfg, std::vector<std::string>(argv + 1, argv + argc));
    if (sub == gen) {
      GenCorpus(g, cfg, n, run);
    } else if (sub == tlm) {
      TrainLm(g, cfg, train, dev, steps, run);
    } else if (sub == dump) {
      DumpReps(cfg, model, data, categories, layers, limit, run);
    } else if (sub == tp) {
      TrainProbes(g, cfg, reps, run);
    } else if (sub == cos) {
      Cosine(probes, run);
    } else if (sub == ce) {
      CrossEval(g, cfg, probes, reps, run);
    } else if (sub == inlp) {
      RunInlp(g, cfg, reps, out, run);
    } else if (sub == as) {
      AmnesicSweep(g, cfg, model, data, projs, position, reps, run);
    } else if (sub == cs) {
      CrossSweep(model, data, projs, run);
    } else if (sub == il) {
      InfoLoss(g, cfg, model, data, projs, position, probe_category, with_random, run);
    } else if (sub == at) {
      AttnSweep(model, data, kinds, mask_mode, run);
    } else if (sub == dist) {
      Distance(model, data, kinds, mask_mode, run);
    } else if (sub == rep) {
      Report(kind, sweeps, losses, run);
    }
    run.Finish();
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.is_user_error() ? 2 : 1;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return 1;
  }
  return 0;
}
