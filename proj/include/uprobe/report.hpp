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

#ifndef UPROBE_REPORT_HPP_
#define UPROBE_REPORT_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "uprobe/agreement.hpp"
#include "uprobe/attention.hpp"
#include "uprobe/probes.hpp"

// CSV and JSON renderings of every analysis result. Numbers use a fixed
// format so that identical results give identical bytes; NaN becomes an
// empty CSV cell and a JSON null.
namespace uprobe {

std::string FormatNumber(double x);

struct ProbeReportRow {
  Category category = Category::kNoun;
  int layer = 0;
  VInformation v;
};

// category,layer,h_v,h_v_cond,i_v,u_v,accuracy,h_v_bits,i_v_bits
std::string ProbeReportCsv(const std::vector<ProbeReportRow>& rows);

// Square matrix with a header row and column of labels.
std::string CosineCsv(const std::vector<std::string>& labels,
                      const Eigen::MatrixXd& cosines);

// probe_category,set_category,layer,accuracy,majority,per_lemma_majority
std::string CrossEvalCsv(const CrossEvalResult& result);

// layer,category,position_kind,baseline_acc,intervened_acc,drop,
// random_control_drop,k_directions
std::string SweepCsv(const std::vector<SweepRow>& rows);
// Rows plus the Table-2 style per-layer arrays.
std::string SweepJson(const std::vector<SweepRow>& rows);
std::vector<SweepRow> SweepFromJson(const std::string& text);

// category,layer,position_kind,k_directions,baseline_acc,intervened_acc,drop
std::string CrossSweepCsv(const std::vector<CrossCell>& cells);

// intervened_layer,read_layer,baseline_accuracy,intervened_accuracy,loss
std::string InfoLossCsv(const InfoLossMatrix& m);
std::string InfoLossJson(const InfoLossMatrix& m);
InfoLossMatrix InfoLossFromJson(const std::string& text);

// kind,i,j,accuracy,drop,n
std::string AttentionCsv(const std::vector<RangeSweep>& sweeps);
// Matrices keyed by kind name, null below the diagonal.
std::string AttentionJson(const std::vector<RangeSweep>& sweeps);

// distance,n,<column>... (accuracy per column).
std::string DistanceCsv(const DistanceTable& table);

// One block per projector category: directions, extractability loss and
// NA drop per layer, each with its random control.
struct Table2Block {
  std::string title;
  std::vector<SweepRow> rows;
};

// Columns: category,row,<layer>... with the row labels
// "Number of Directions", "Loss in Layers", "Loss in Layers (Random)",
// "NA Performance Drop", "NA Performance Drop (Random)".
std::string Table2Csv(const std::vector<Table2Block>& blocks);
std::string Table2Json(const std::vector<Table2Block>& blocks);

std::string NAResultJson(const NAResult& r);

}  // namespace uprobe

#endif  // UPROBE_REPORT_HPP_
