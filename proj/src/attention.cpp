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

#include "uprobe/attention.hpp"

#include <limits>
#include <string>

#include <spdlog/spdlog.h>

#include "uprobe/errors.hpp"

namespace uprobe {

InterventionFn MaskRange(MaskKind kind, int first, int last) {
  if (first < 0 || last < first) {
    throw Error(ErrorKind::kIntervention, "attention range must satisfy 0 <= i <= j");
  }
  return [kind, first, last](const AgreementInstance& inst) {
    AttentionMaskSpec spec;
    spec.kind = kind;
    spec.cue_position = inst.cue_index;
    spec.target_position = inst.target_index;
    spec.first_layer = first;
    spec.last_layer = last;
    return std::vector<InterventionSpec>{MaskAttention{spec}};
  };
}

RangeSweep RunRangeSweep(const Model& model, const Dataset& data, MaskKind kind,
                         const NAResult* baseline) {
  const int L = model.config().n_layers;
  RangeSweep s;
  s.kind = kind;
  s.baseline = baseline ? *baseline : NaEval(model, data);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.accuracy = Eigen::MatrixXd::Constant(L, L, nan);
  s.drop = Eigen::MatrixXd::Constant(L, L, nan);
  s.results.assign(L, std::vector<NAResult>(L));
  for (int i = 0; i < L; ++i) {
    for (int j = i; j < L; ++j) {
      const NAResult r = NaEval(model, data, MaskRange(kind, i, j));
      s.accuracy(i, j) = r.accuracy;
      s.drop(i, j) = MakeDrop(s.baseline, r).drop;
      s.results[i][j] = r;
      spdlog::info("attention {} [{}, {}]: accuracy {:.4f} drop {:.4f}",
                   ToString(kind), i, j, r.accuracy, s.drop(i, j));
    }
  }
  return s;
}

DistanceTable Triptych::Table(int condition) const {
  const std::vector<NAResult>* src = condition == 0   ? &single
                                     : condition == 1 ? &upward
                                                      : &downward;
  std::vector<std::string> cols{"none"};
  std::vector<NAResult> res{baseline};
  for (std::size_t l = 0; l < src->size(); ++l) {
    cols.push_back(std::to_string(l));
    res.push_back((*src)[l]);
  }
  return DistanceStratified(cols, res);
}

Triptych RunTriptych(const Model& model, const Dataset& data, MaskKind kind,
                     const RangeSweep* sweep) {
  const int L = model.config().n_layers;
  Triptych t;
  t.kind = kind;
  t.baseline = sweep ? sweep->baseline : NaEval(model, data);
  auto cell = [&](int i, int j) {
    if (sweep && sweep->kind == kind) return sweep->results[i][j];
    return NaEval(model, data, MaskRange(kind, i, j));
  };
  for (int l = 0; l < L; ++l) {
    t.single.push_back(cell(l, l));
    t.upward.push_back(cell(l, L - 1));
    t.downward.push_back(cell(0, l));
  }
  return t;
}

}  // namespace uprobe
