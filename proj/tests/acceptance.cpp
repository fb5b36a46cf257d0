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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Set UPROBE_ACCEPTANCE_DIR to keep artifacts.

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli_runner.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "uprobe/agreement.hpp"
#include "uprobe/amnesic.hpp"
#include "uprobe/binio.hpp"
#include "uprobe/config.hpp"
#include "uprobe/corpus.hpp"
#include "uprobe/model.hpp"
#include "uprobe/probes.hpp"
#include "uprobe/report.hpp"
#include "uprobe/training.hpp"

namespace fs = std::filesystem;
using namespace uprobe;
using nlohmann::json;
using testing::RunCli;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
  void Note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string Fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

int failures = 0;
std::ofstream results;  // acceptance_results.txt, a copy of stdout

void Emit(const std::string& line) {
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  results << line << "\n" << std::flush;
}

void Report(int id, const std::string& name, Outcome o, double seconds, double budget) {
  o.Require(seconds <= budget, "time " + Fmt(seconds) + "s over " + Fmt(budget) + "s");
  if (!o.pass) ++failures;
  char head[256];
  std::snprintf(head, sizeof head, "%s [%d] %s (%.1fs): ", o.pass ? "PASS" : "FAIL", id,
                name.c_str(), seconds);
  Emit(head + o.detail);
}

// Runs `body`, turning escaped exceptions into a failure.
void Criterion(int id, const std::string& name, double budget,
               const std::function<void(Outcome&)>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.Require(false, std::string("exception: ") + e.what());
  }
  Report(id, name, o, Seconds(t0), budget);
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---------------------------------------------------------------- 1

void ProjectorAlgebra(Outcome& o) {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int d : {2, 8, 64}) {
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd theta(d);
      for (int i = 0; i < d; ++i) theta(i) = normal(rng);
      theta *= std::exp(3.0 * normal(rng));  // assorted scales
      const Eigen::MatrixXd p = NullspaceProjector(theta);
      const double sym = (p - p.transpose()).cwiseAbs().maxCoeff();
      const double idem = (p * p - p).cwiseAbs().maxCoeff();
      const double kill = (p * theta).norm() / theta.norm();
      const double trace = std::abs(p.trace() - (d - 1));
      worst = std::max({worst, sym, idem, kill, trace});
    }
  }
  o.Require(worst <= 1e-5, "max deviation " + Fmt(worst));
  o.Note("3000 projectors, max deviation " + Fmt(worst));
}

// ---------------------------------------------------------------- 2

void VInformationOracle(Outcome& o) {
  std::mt19937_64 rng(202);
  double worst_cond = 0.0;
  int prior_mismatch = 0;
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const int lo = std::max(4, 2 * (d + 1));
    const int n = lo + static_cast<int>(rng() % static_cast<unsigned>(16 - lo + 1));
    const oracle::ToySet s = oracle::NonSeparableSet(n, d, rng);
    std::vector<NumberLabel> labels;
    std::size_t sg = 0;
    for (int y : s.y) {
      labels.push_back(y == 1 ? NumberLabel::kSingular : NumberLabel::kPlural);
      sg += y == 1;
    }
    const ProbeParams p = TrainProbeDense(s.x, labels);
    const double h_cond = MeanLogLoss(p, s.x, labels);
    const double grid = oracle::GridSearchLogLoss(s.x, s.y);
    worst_cond = std::max(worst_cond, std::abs(h_cond - grid));
    if (VEntropy(labels) != oracle::PriorEntropy(sg, labels.size())) ++prior_mismatch;
  }
  o.Require(worst_cond <= 1e-3, "conditional entropy off by " + Fmt(worst_cond));
  o.Require(prior_mismatch == 0, std::to_string(prior_mismatch) + " prior entropies differ");
  o.Note("20 datasets, max |H(N|R) - grid| " + Fmt(worst_cond) + ", prior exact");
}

// ---------------------------------------------------------------- 3

// Synthetic INLP runs: number encoded along a few noisy directions.
std::vector<RepresentationSet> ToyInlpSets() {
  std::vector<RepresentationSet> out;
  std::mt19937_64 rng(303);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int d : {8, 16, 64}) {
    RepresentationSet r;
    const int n = 600;
    r.rows.resize(n, d);
    for (int i = 0; i < n; ++i) {
      const bool sg = (rng() & 1) != 0;
      r.labels.push_back(sg ? NumberLabel::kSingular : NumberLabel::kPlural);
      r.positions.push_back(1);
      r.lemmas.push_back("lemma" + std::to_string(i % 30));
      for (int k = 0; k < d; ++k) {
        double v = normal(rng);
        if (k < 3) v += (sg ? 1.0 : -1.0) * (1.5 - 0.4 * k);
        r.rows(i, k) = static_cast<float>(v);
      }
    }
    r.category = Category::kNoun;
    out.push_back(std::move(r));
  }
  return out;
}

void CheckInlpRun(const RowSplit& s, const AmnesicProjector& proj, const std::string& name,
                  Outcome& o) {
  const int d = proj.dim();
  const int rank = oracle::SvdRank(proj.composed, 1e-6);
  o.Require(rank == d - proj.k(), name + " rank " + std::to_string(rank) + " != " +
                                      std::to_string(d) + " - " + std::to_string(proj.k()));
  const RepresentationSet tr = ApplyProjection(s.train, proj);
  const RepresentationSet dv = ApplyProjection(s.dev, proj);
  const double majority = MajorityRate(s.dev);
  const double acc = Accuracy(TrainProbe(tr, dv), dv);
  o.Require(acc <= majority + 0.005,
            name + " retrained dev accuracy " + Fmt(acc) + " vs majority " + Fmt(majority));
}

void InlpConvergence(const fs::path& e2e, int layers, Outcome& o) {
  int runs = 0;
  for (const auto& set : ToyInlpSets()) {
    const RowSplit s = SplitRows(set, 0.2, 5);
    const AmnesicProjector proj = Inlp(s.train, s.dev);
    CheckInlpRun(s, proj, "toy d=" + std::to_string(set.rows.cols()), o);
    ++runs;
  }
  // The pipeline runs, recomputed in double precision on the same split and
  // matched against the saved projectors.
  const ToolConfig cfg = DefaultToolConfig();
  ProbeSplit split = cfg.probe_split;
  split.seed = 1;
  for (const char* cat : {"noun", "masked_verb"}) {
    for (int l = 0; l <= layers; ++l) {
      const std::string stem = std::string(cat) + "_l" + std::to_string(l);
      const RepresentationSet reps = LoadRepresentations((e2e / "reps" / (stem + ".repr")).string());
      const AmnesicProjector saved = LoadProjector((e2e / "proj" / (stem + ".proj")).string());
      const RowSplit s = MakeSplit(reps, split);
      const AmnesicProjector proj = Inlp(s.train, s.dev, cfg.inlp, cfg.probe);
      o.Require(proj.k() == saved.k(), stem + " k differs from the saved projector");
      o.Require((proj.composed - saved.composed).cwiseAbs().maxCoeff() <= 1e-5,
                stem + " composed differs from the saved projector");
      CheckInlpRun(s, proj, stem, o);
      ++runs;
    }
  }
  o.Note(std::to_string(runs) + " runs");
}

// ---------------------------------------------------------------- 4, 5

struct Pipeline {
  fs::path dir;
  fs::path log;
  bool ok = true;
  std::string failed_step;
  double seconds = 0.0;
  int layers = 0;

  void Step(const std::vector<std::string>& args) {
    if (!ok) return;
    const int code = RunCli(dir, args, log);
    if (code != 0) {
      ok = false;
      failed_step = args[0] + " exited " + std::to_string(code);
    }
  }
};

Pipeline RunPipeline(const fs::path& dir) {
  Pipeline p;
  p.dir = dir;
  p.log = dir / "pipeline.log";
  fs::create_directories(dir);
  const auto t0 = Clock::now();
  p.Step({"gen-corpus", "--out-dir", "corpus"});
  p.Step({"train-lm", "--train", "corpus/train.jsonl", "--dev", "corpus/dev.jsonl",
          "--out-dir", "lm"});
  if (p.ok) p.layers = LoadModel((dir / "lm/model.bin").string()).config().n_layers;
  p.Step({"dump-reps", "--model", "lm/model.bin", "--data", "corpus/train.jsonl",
          "--categories", "noun,masked_verb", "--out-dir", "reps"});
  std::vector<std::string> inlp{"inlp", "--out-dir", "proj"};
  std::vector<std::string> noun_proj, verb_proj, noun_reps, verb_reps;
  for (int l = 0; l <= p.layers; ++l) {
    const std::string s = "_l" + std::to_string(l);
    noun_reps.push_back("reps/noun" + s + ".repr");
    verb_reps.push_back("reps/masked_verb" + s + ".repr");
    noun_proj.push_back("proj/noun" + s + ".proj");
    verb_proj.push_back("proj/masked_verb" + s + ".proj");
  }
  inlp.push_back("--reps");
  inlp.insert(inlp.end(), noun_reps.begin(), noun_reps.end());
  inlp.insert(inlp.end(), verb_reps.begin(), verb_reps.end());
  p.Step(inlp);
  auto with = [](std::vector<std::string> base, const std::string& flag,
                 const std::vector<std::string>& vals) {
    base.push_back(flag);
    base.insert(base.end(), vals.begin(), vals.end());
    return base;
  };
  const std::vector<std::string> model_data{"--model", "lm/model.bin", "--data",
                                            "corpus/test.jsonl"};
  auto cmd = [&](const std::string& name, std::vector<std::string> rest) {
    std::vector<std::string> c{name};
    c.insert(c.end(), model_data.begin(), model_data.end());
    c.insert(c.end(), rest.begin(), rest.end());
    return c;
  };
  p.Step(with(with(cmd("amnesic-sweep", {"--position", "cue", "--out-dir", "sweep"}),
                   "--proj", noun_proj),
              "--reps", noun_reps));
  p.Step(with(with(cmd("amnesic-sweep", {"--position", "target", "--out-dir", "sweep"}),
                   "--proj", verb_proj),
              "--reps", verb_reps));
  p.Step(with(cmd("info-loss", {"--position", "cue", "--probe-category", "masked_verb",
                                "--random", "--out-dir", "loss"}),
              "--proj", noun_proj));
  p.Step(with(cmd("info-loss", {"--position", "target", "--probe-category", "masked_verb",
                                "--random", "--out-dir", "loss"}),
              "--proj", verb_proj));
  p.Step({"report", "--kind", "alignment", "--sweeps", "sweep/sweep_noun_cue.json",
          "sweep/sweep_masked_verb_target.json", "--info-loss", "loss/info_loss_noun_cue.json",
          "loss/info_loss_noun_cue_random.json", "loss/info_loss_masked_verb_target.json",
          "loss/info_loss_masked_verb_target_random.json", "--out-dir", "report"});
  p.seconds = Seconds(t0);
  return p;
}

const SweepRow* FindRow(const std::vector<SweepRow>& rows, int layer) {
  for (const auto& r : rows) {
    if (r.layer == layer) return &r;
  }
  return nullptr;
}

void EndToEnd(const Pipeline& p, Outcome& o) {
  o.Require(p.ok, "pipeline step " + p.failed_step + " (see " + p.log.string() + ")");
  if (!p.ok) return;
  const auto nouns = SweepFromJson(ReadAll(p.dir / "sweep/sweep_noun_cue.json"));
  const auto verbs = SweepFromJson(ReadAll(p.dir / "sweep/sweep_masked_verb_target.json"));
  const NAResult& base = nouns.front().amnesic.baseline;
  o.Require(base.accuracy > 0.90, "(a) NA " + Fmt(base.accuracy));
  o.Note("(a) NA " + Fmt(base.accuracy) + " over " + std::to_string(base.n));

  auto erasure = [&](const std::vector<SweepRow>& rows, int layer, const std::string& tag) {
    const SweepRow* r = FindRow(rows, layer);
    if (!r) {
      o.Require(false, tag + " row missing");
      return;
    }
    const double drop = r->amnesic.drop;
    const double control = r->random_control.drop;
    o.Require(drop >= 5.0 * control, tag + " drop " + Fmt(drop) + " < 5x control " + Fmt(control));
    o.Require(drop > 0.0, tag + " drop is not positive");
    o.Note(tag + " drop " + Fmt(drop) + " vs control " + Fmt(control));
  };
  erasure(nouns, 0, "(b) cue layer 0");
  erasure(verbs, p.layers, "(c) target layer " + std::to_string(p.layers));

  const json align = json::parse(ReadAll(p.dir / "report/alignment.json"));
  std::vector<double> x, y;
  for (const auto& pt : align.at("points")) {
    x.push_back(pt.at("info_loss").get<double>());
    y.push_back(pt.at("drop").get<double>());
  }
  const double r = oracle::Pearson(x, y);
  o.Require(!align.at("pearson").is_null(), "(d) no correlation reported");
  if (!align.at("pearson").is_null()) {
    o.Require(std::abs(align.at("pearson").get<double>() - r) <= 1e-9,
              "(d) reported r disagrees with the oracle");
  }
  o.Require(r > 0.7, "(d) r " + Fmt(r));
  o.Note("(d) r " + Fmt(r) + " over " + std::to_string(x.size()) + " points");
}

bool BitEqual(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

void Attention(const Pipeline& p, Outcome& o) {
  o.Require(p.ok, "pipeline did not finish");
  if (!p.ok) return;
  const fs::path log = p.dir / "attention.log";
  const int code = RunCli(p.dir,
                          {"attn-sweep", "--model", "lm/model.bin", "--data", "corpus/test.jsonl",
                           "--kinds", "identity,target_to_cue,all_to_cue", "--out-dir", "attn"},
                          log);
  o.Require(code == 0, "attn-sweep exited " + std::to_string(code));
  if (code != 0) return;

  // Identity masks over every block range, on every test sentence.
  const Model model = LoadModel((p.dir / "lm/model.bin").string());
  const Dataset test = LoadDataset((p.dir / "corpus/test.jsonl").string());
  const int L = model.config().n_layers;
  std::size_t differing = 0;
  for (const auto& inst : test) {
    const auto ids = MaskTarget(model.vocab(), inst);
    const Matrix base = model.Logits(ids);
    for (int i = 0; i < L; ++i) {
      for (int j = i; j < L; ++j) {
        MaskAttention m;
        m.spec.kind = MaskKind::kIdentity;
        m.spec.cue_position = inst.cue_index;
        m.spec.target_position = inst.target_index;
        m.spec.first_layer = i;
        m.spec.last_layer = j;
        const std::vector<InterventionSpec> iv{m};
        if (!BitEqual(base, model.Logits(ids, iv))) ++differing;
      }
    }
  }
  o.Require(differing == 0, std::to_string(differing) + " identity-masked forwards differ");

  const json a = json::parse(ReadAll(p.dir / "attn/attention.json"));
  for (const auto& row : a.at("identity")) {
    for (const auto& v : row) {
      if (!v.is_null()) o.Require(v.get<double>() == 0.0, "identity sweep drop nonzero");
    }
  }
  for (const char* kind : {"target_to_cue", "all_to_cue"}) {
    const auto& m = a.at(kind);
    std::string singles;
    for (int l = 0; l < L; ++l) {
      const double d = m.at(l).at(l).get<double>();
      o.Require(d <= 0.02, std::string(kind) + " single cut at block " + std::to_string(l) +
                               " drops " + Fmt(d));
      singles += (l ? "," : "") + Fmt(d);
    }
    o.Note(std::string(kind) + " single cuts " + singles);
  }
  const double ttc = a.at("target_to_cue").at(0).at(L - 1).get<double>();
  const double atc = a.at("all_to_cue").at(0).at(L - 1).get<double>();
  o.Require(atc > ttc, "full-range all_to_cue " + Fmt(atc) + " <= target_to_cue " + Fmt(ttc));
  o.Note("full range all_to_cue " + Fmt(atc) + " vs target_to_cue " + Fmt(ttc));
}

// ---------------------------------------------------------------- 6

void GradientCheck(Outcome& o) {
  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.hidden_dim = 8;
  cfg.n_heads = 2;
  cfg.ffn_dim = 16;
  cfg.seed = 11;
  const Vocabulary v = Vocabulary::FromGrammar(DefaultGrammar());
  const Model m = Model::Initialize(cfg, v);
  const Dataset data = GenerateCorpus(DefaultGrammar(), 3, 2);
  const MaskedExample ex = MakeMaskedExample(v, data[0], 0.3, 1.0, 4);
  Params p = m.params();
  Params g = ZerosLike(p);
  LossAndGradient(m.config(), p, ex, &g);
  std::vector<const Matrix*> grads;
  VisitTensors(g, [&](const std::string&, const Matrix& x, bool) { grads.push_back(&x); });
  std::size_t t = 0;
  double worst = 0.0;
  std::string worst_name;
  VisitTensors(p, [&](const std::string& name, Matrix& w, bool) {
    Matrix num = Matrix::Zero(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double orig = w.data()[i];
      w.data()[i] = orig + 1e-5;
      const double up = LossAndGradient(m.config(), p, ex, nullptr);
      w.data()[i] = orig - 1e-5;
      const double down = LossAndGradient(m.config(), p, ex, nullptr);
      w.data()[i] = orig;
      num.data()[i] = (up - down) / 2e-5;
    }
    const Matrix& an = *grads[t++];
    const double scale = std::max(num.norm(), an.norm());
    const double err = scale < 1e-8 ? (num - an).cwiseAbs().maxCoeff()
                                    : (num - an).norm() / scale;
    if (err > worst) {
      worst = err;
      worst_name = name;
    }
  });
  o.Require(worst <= 1e-3, "relative error " + Fmt(worst) + " in " + worst_name);
  o.Note(std::to_string(t) + " tensors, max relative error " + Fmt(worst) +
         (worst_name.empty() ? "" : " (" + worst_name + ")"));
}

// ---------------------------------------------------------------- 7

const char* kTinyConfig = R"({
  "corpus": {"n_sentences": 300},
  "model": {"n_layers": 2, "n_heads": 2, "hidden_dim": 16, "ffn_dim": 32},
  "train": {"steps": 40, "batch_size": 8, "key_dropout": 0.1, "log_every": 10},
  "probe_sentences": 200
})";

std::vector<std::vector<std::string>> EveryCommand() {
  const std::vector<std::string> md{"--model", "lm/model.bin", "--data", "corpus/test.jsonl"};
  auto c = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.begin() + 1, md.begin(), md.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  const std::vector<std::string> nouns{"reps/noun_l0.repr", "reps/noun_l1.repr",
                                       "reps/noun_l2.repr"};
  const std::vector<std::string> projs{"proj/noun_l0.proj", "proj/noun_l1.proj",
                                       "proj/noun_l2.proj", "proj/masked_verb_l2.proj"};
  auto cat = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return {
      {"gen-corpus", "--out-dir", "corpus"},
      {"train-lm", "--train", "corpus/train.jsonl", "--dev", "corpus/dev.jsonl", "--out-dir",
       "lm"},
      {"dump-reps", "--model", "lm/model.bin", "--data", "corpus/train.jsonl", "--categories",
       "noun,masked_verb", "--out-dir", "reps"},
      cat({"train-probes", "--out-dir", "probes", "--reps"}, nouns),
      {"cosine", "--out-dir", "probes", "--probes", "probes/probe_noun_l1.json",
       "probes/probe_noun_l2.json"},
      cat(cat({"cross-eval", "--out-dir", "probes", "--probes", "probes/probe_noun_l1.json",
               "probes/probe_noun_l2.json", "--reps"},
              nouns),
          {"reps/masked_verb_l1.repr", "reps/masked_verb_l2.repr"}),
      cat({"inlp", "--out-dir", "proj", "--reps"}, cat(nouns, {"reps/masked_verb_l2.repr"})),
      c({"amnesic-sweep", "--position", "cue", "--out-dir", "sweep", "--reps"},
        cat(nouns, cat({"--proj"}, {projs[0], projs[1], projs[2]}))),
      c({"amnesic-sweep", "--position", "target", "--out-dir", "sweep2", "--proj"},
        {projs[3]}),
      c({"cross-sweep", "--out-dir", "cross", "--proj"}, projs),
      c({"info-loss", "--position", "cue", "--random", "--out-dir", "loss", "--proj"},
        {projs[0], projs[1], projs[2]}),
      c({"attn-sweep", "--out-dir", "attn"}, {}),
      c({"distance", "--out-dir", "dist"}, {}),
      {"report", "--kind", "table2", "--out-dir", "report", "--sweeps",
       "sweep/sweep_noun_cue.json", "sweep2/sweep_masked_verb_target.json"},
      {"report", "--kind", "alignment", "--out-dir", "report2", "--sweeps",
       "sweep/sweep_noun_cue.json", "--info-loss", "loss/info_loss_noun_cue.json",
       "loss/info_loss_noun_cue_random.json"},
  };
}

std::string WithoutWallClock(const std::string& text) {
  json j = json::parse(text);
  j.erase("wall_clock_seconds");
  return j.dump();
}

void Determinism(const fs::path& root, Outcome& o) {
  const auto commands = EveryCommand();
  std::vector<fs::path> dirs{root / "a", root / "b"};
  for (const auto& d : dirs) {
    fs::create_directories(d);
    std::ofstream(d / "tiny.json") << kTinyConfig;
    for (const auto& args : commands) {
      std::vector<std::string> full{"--config", "tiny.json", "--threads", "2"};
      full.insert(full.end(), args.begin(), args.end());
      const int code = RunCli(d, full, d / "cli.log");
      o.Require(code == 0, args[0] + " exited " + std::to_string(code) + " in " + d.string());
    }
  }
  std::size_t compared = 0, manifests = 0;
  for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dirs[0]);
    if (rel == "cli.log") continue;
    const fs::path other = dirs[1] / rel;
    if (!fs::exists(other)) {
      o.Require(false, rel.string() + " missing from the rerun");
      continue;
    }
    const std::string a = ReadAll(e.path());
    const std::string b = ReadAll(other);
    if (rel.filename().string().ends_with(".manifest.json")) {
      ++manifests;
      o.Require(WithoutWallClock(a) == WithoutWallClock(b), rel.string() + " differs");
    } else {
      ++compared;
      o.Require(a == b, rel.string() + " differs");
    }
  }
  o.Require(manifests == commands.size(), "expected one manifest per command, found " +
                                              std::to_string(manifests));
  o.Note(std::to_string(commands.size()) + " commands, " + std::to_string(compared) +
         " artifacts byte-identical, manifests equal apart from wall clock");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  results.open("acceptance_results.txt");
  std::optional<testing::TempDir> temp;
  fs::path root;
  if (const char* keep = std::getenv("UPROBE_ACCEPTANCE_DIR")) {
    root = keep;
    fs::create_directories(root);
  } else {
    temp.emplace("acceptance");
    root = temp->path();
  }

  Criterion(1, "projector algebra", 10, ProjectorAlgebra);
  Criterion(2, "V-information against a grid-search oracle", 120, VInformationOracle);
  Criterion(6, "gradient check, 1 layer, d = 8", 60, GradientCheck);

  Pipeline pipe = RunPipeline(root / "e2e");
  {
    Outcome o;
    try {
      EndToEnd(pipe, o);
    } catch (const std::exception& e) {
      o.Require(false, std::string("exception: ") + e.what());
    }
    Report(4, "end-to-end toy pipeline", o, pipe.seconds, 1800);
  }
  Criterion(3, "INLP convergence and composed rank", 300, [&](Outcome& o) {
    o.Require(pipe.ok, "pipeline did not finish");
    if (pipe.ok) InlpConvergence(root / "e2e", pipe.layers, o);
  });
  Criterion(5, "attention interventions", 900, [&](Outcome& o) { Attention(pipe, o); });
  Criterion(7, "determinism of every subcommand", 600,
            [&](Outcome& o) { Determinism(root / "determinism", o); });

  Emit(std::string(failures ? "FAIL" : "PASS") + ": " + std::to_string(failures) +
       " criteria failed");
  return failures ? 1 : 0;
}
