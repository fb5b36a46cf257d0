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

#include "uprobe/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include <spdlog/spdlog.h>

#include "uprobe/errors.hpp"
#include "uprobe/parallel.hpp"

namespace uprobe {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Outcome { kCorrect, kWrong, kTie, kSkipped };

std::uint64_t LayerSeed(std::uint64_t seed, int layer) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(layer), 0x5eedu};
  std::mt19937_64 g(seq);
  return g();
}

}  // namespace

std::string_view ToString(PositionKind k) {
  return k == PositionKind::kCue ? "cue" : "target";
}

PositionKind ParsePositionKind(std::string_view text) {
  if (text == "cue") return PositionKind::kCue;
  if (text == "target") return PositionKind::kTarget;
  throw Error(ErrorKind::kParse, "unknown position kind \"" + std::string(text) + "\"");
}

NAResult NaEval(const Model& model, const Dataset& data,
                const InterventionFn& interventions) {
  const Vocabulary& vocab = model.vocab();
  std::vector<Outcome> outcome(data.size(), Outcome::kSkipped);
  ParallelFor(data.size(), [&](std::size_t i) {
    const AgreementInstance& inst = data[i];
    if (!vocab.Contains(inst.target_sg_form) || !vocab.Contains(inst.target_pl_form)) {
      return;
    }
    const std::vector<InterventionSpec> ivs =
        interventions ? interventions(inst) : std::vector<InterventionSpec>{};
    const Matrix logits = model.Logits(MaskTarget(vocab, inst), ivs);
    const auto t = static_cast<Eigen::Index>(inst.target_index);
    const NumberLabel want = inst.cue_number;
    const double good = logits(t, vocab.Id(want == NumberLabel::kSingular
                                               ? inst.target_sg_form
                                               : inst.target_pl_form));
    const double bad = logits(t, vocab.Id(want == NumberLabel::kSingular
                                              ? inst.target_pl_form
                                              : inst.target_sg_form));
    outcome[i] = good > bad ? Outcome::kCorrect
                            : (good == bad ? Outcome::kTie : Outcome::kWrong);
  });

  NAResult r;
  std::size_t sg = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (outcome[i] == Outcome::kSkipped) {
      ++r.skipped;
      continue;
    }
    const bool ok = outcome[i] == Outcome::kCorrect;
    ++r.n;
    r.correct += ok;
    r.ties += outcome[i] == Outcome::kTie;
    sg += data[i].cue_number == NumberLabel::kSingular;
    auto& bd = r.per_distance[static_cast<int>(data[i].distance())];
    ++bd.n;
    bd.correct += ok;
    auto& ba = r.per_attractors[data[i].attractor_count];
    ++ba.n;
    ba.correct += ok;
  }
  if (r.skipped > 0) {
    spdlog::warn("NA evaluation skipped {} instance(s) with out-of-vocabulary "
                 "candidate forms", r.skipped);
  }
  if (r.n > 0) {
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.n);
    r.majority = static_cast<double>(std::max(sg, r.n - sg)) /
                 static_cast<double>(r.n);
  }
  return r;
}

DropReport MakeDrop(const NAResult& baseline, const NAResult& intervened) {
  if (baseline.n != intervened.n) {
    throw Error(ErrorKind::kData,
                "baseline and intervened runs scored different instance sets");
  }
  DropReport d;
  d.baseline = baseline;
  d.intervened = intervened;
  d.drop = baseline.accuracy - intervened.accuracy;
  d.majority_gap = baseline.accuracy - baseline.majority;
  return d;
}

InterventionFn ProjectAt(int layer, PositionKind where,
                         const AmnesicProjector& proj) {
  auto matrix = std::make_shared<const Matrix>(proj.composed);
  return [layer, where, matrix](const AgreementInstance& inst) {
    ProjectRepresentation p;
    p.layer = layer;
    p.positions = {where == PositionKind::kCue ? inst.cue_index
                                               : inst.target_index};
    p.matrix = matrix;
    return std::vector<InterventionSpec>{p};
  };
}

AmnesicProjector ControlProjector(int d, int k, std::uint64_t control_seed,
                                  int layer) {
  AmnesicProjector p = RandomProjector(d, k, LayerSeed(control_seed, layer));
  p.layer = layer;
  return p;
}

std::vector<SweepRow> AmnesicNaSweep(
    const Model& model, const Dataset& data,
    const std::map<int, AmnesicProjector>& projectors, PositionKind where,
    std::uint64_t control_seed, const NAResult* baseline) {
  const NAResult base = baseline ? *baseline : NaEval(model, data);
  const int d = model.config().hidden_dim;
  std::vector<SweepRow> rows;
  for (const auto& [layer, proj] : projectors) {
    if (proj.dim() != d) {
      throw Error(ErrorKind::kShape, "projector dimension " +
                                         std::to_string(proj.dim()) +
                                         " does not match model dimension " +
                                         std::to_string(d));
    }
    SweepRow row;
    row.layer = layer;
    row.category = proj.category;
    row.position = where;
    row.k = proj.k();
    row.amnesic = MakeDrop(base, NaEval(model, data, ProjectAt(layer, where, proj)));
    AmnesicProjector control = ControlProjector(d, proj.k(), control_seed, layer);
    control.category = proj.category;
    row.random_control =
        MakeDrop(base, NaEval(model, data, ProjectAt(layer, where, control)));
    spdlog::info("{}@{} at {}: k={} drop {:.4f} (random {:.4f})",
                 ToString(row.category), layer, ToString(where), row.k,
                 row.amnesic.drop, row.random_control.drop);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CrossCell> CrossCategorySweep(
    const Model& model, const Dataset& data,
    const std::map<ProbeKey, AmnesicProjector>& projectors,
    std::span<const PositionKind> positions, const NAResult* baseline) {
  const NAResult base = baseline ? *baseline : NaEval(model, data);
  std::vector<CrossCell> cells;
  for (const auto& [key, proj] : projectors) {
    if (proj.dim() != model.config().hidden_dim) {
      throw Error(ErrorKind::kShape, "projector dimension does not match model");
    }
    for (PositionKind where : positions) {
      CrossCell c;
      c.category = key.first;
      c.layer = key.second;
      c.position = where;
      c.k = proj.k();
      c.report = MakeDrop(base, NaEval(model, data, ProjectAt(key.second, where, proj)));
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

RowSplit MakeSplit(const RepresentationSet& reps, const ProbeSplit& split) {
  return split.by_lemma ? SplitByLemma(reps, split.dev_fraction, split.seed)
                        : SplitRows(reps, split.dev_fraction, split.seed);
}

double ProbeDevAccuracy(const RepresentationSet& reps, const ProbeSplit& split,
                        const ProbeHyper& hyper) {
  const RowSplit s = MakeSplit(reps, split);
  const std::size_t sg = CountLabel(s.train, NumberLabel::kSingular);
  if (sg == 0 || sg == s.train.size()) {
    // A constant predictor is all a probe can learn here.
    const NumberLabel only = sg == 0 ? NumberLabel::kPlural : NumberLabel::kSingular;
    return static_cast<double>(CountLabel(s.dev, only)) /
           static_cast<double>(std::max<std::size_t>(1, s.dev.size()));
  }
  return TrainProbe(s.train, s.dev, hyper).dev_accuracy;
}

double ExtractabilityLoss(const RepresentationSet& reps,
                          const AmnesicProjector& proj, const ProbeSplit& split,
                          const ProbeHyper& hyper) {
  return ProbeDevAccuracy(reps, split, hyper) -
         ProbeDevAccuracy(ApplyProjection(reps, proj), split, hyper);
}

double InfoLossMatrix::At(int i, int j) const {
  for (const auto& r : rows) {
    if (r.layer == i && j >= 0 && j < static_cast<int>(r.loss.size())) return r.loss[j];
  }
  return kNaN;
}

InfoLossMatrix ComputeInfoLoss(const Model& model, const Dataset& data,
                               const std::map<int, AmnesicProjector>& projectors,
                               PositionKind where, Category probe_category,
                               const ProbeSplit& split,
                               const ProbeHyper& hyper) {
  const int L = model.config().n_layers;
  InfoLossMatrix m;
  m.probe_category = probe_category;
  m.position = where;
  if (!projectors.empty()) {
    m.projector_category = projectors.begin()->second.category;
    m.random_control =
        projectors.begin()->second.stop_reason == StopReason::kRandom;
  }
  const auto plain = CollectAllLayers(model, data, probe_category);
  for (int j = 0; j <= L; ++j) {
    m.baseline_accuracy.push_back(ProbeDevAccuracy(plain[j], split, hyper));
  }
  for (const auto& [layer, proj] : projectors) {
    if (layer < 0 || layer > L) {
      throw Error(ErrorKind::kBounds, "projector layer outside [0, L]");
    }
    InfoLossRow row;
    row.layer = layer;
    row.loss.assign(L + 1, kNaN);
    row.intervened_accuracy.assign(L + 1, kNaN);
    const auto reps =
        CollectAllLayers(model, data, probe_category, ProjectAt(layer, where, proj));
    for (int j = layer; j <= L; ++j) {
      const double acc = ProbeDevAccuracy(reps[j], split, hyper);
      row.intervened_accuracy[j] = acc;
      row.loss[j] = m.baseline_accuracy[j] - acc;
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

std::vector<AlignmentPoint> AlignmentPoints(
    std::span<const SweepRow> rows, std::span<const InfoLossMatrix> losses) {
  std::vector<AlignmentPoint> out;
  for (const auto& r : rows) {
    for (bool control : {false, true}) {
      for (const auto& m : losses) {
        if (m.projector_category != r.category || m.position != r.position ||
            m.random_control != control || m.baseline_accuracy.empty()) {
          continue;
        }
        const int last = static_cast<int>(m.baseline_accuracy.size()) - 1;
        const double loss = m.At(r.layer, last);
        if (!std::isfinite(loss)) continue;
        AlignmentPoint p;
        p.category = r.category;
        p.position = r.position;
        p.layer = r.layer;
        p.random_control = control;
        p.info_loss = loss;
        p.drop = control ? r.random_control.drop : r.amnesic.drop;
        out.push_back(p);
        break;
      }
    }
  }
  return out;
}

DistanceTable DistanceStratified(std::span<const std::string> columns,
                                 std::span<const NAResult> results) {
  if (columns.size() != results.size()) {
    throw Error(ErrorKind::kShape, "one column name per result is required");
  }
  DistanceTable t;
  t.columns.assign(columns.begin(), columns.end());
  std::map<int, bool> seen;
  for (const auto& r : results) {
    for (const auto& [dist, b] : r.per_distance) seen[dist] = true;
  }
  for (const auto& [dist, unused] : seen) t.distances.push_back(dist);
  for (const auto& r : results) {
    std::vector<double> acc;
    std::vector<std::size_t> n;
    for (int dist : t.distances) {
      auto it = r.per_distance.find(dist);
      if (it == r.per_distance.end() || it->second.n == 0) {
        acc.push_back(kNaN);
        n.push_back(0);
      } else {
        acc.push_back(it->second.accuracy());
        n.push_back(it->second.n);
      }
    }
    t.accuracy.push_back(std::move(acc));
    t.counts.push_back(std::move(n));
  }
  return t;
}

double PearsonCorrelation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::kShape, "correlation needs two equal series of length >= 2");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw Error(ErrorKind::kDegenerate, "correlation of a constant series");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace uprobe
