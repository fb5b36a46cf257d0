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

#include "uprobe/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "uprobe/errors.hpp"

namespace uprobe {
namespace {

using nlohmann::ordered_json;

ordered_json Num(double x) {
  return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr);
}

double NumOr(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nan("");
  return j.at(key).get<double>();
}

ordered_json BucketsJson(const std::map<int, Bucket>& m) {
  ordered_json a = ordered_json::array();
  for (const auto& [key, b] : m) {
    a.push_back({{"key", key}, {"accuracy", b.accuracy()}, {"n", b.n}});
  }
  return a;
}

ordered_json NaJson(const NAResult& r) {
  ordered_json j;
  j["accuracy"] = r.accuracy;
  j["n"] = r.n;
  j["correct"] = r.correct;
  j["ties"] = r.ties;
  j["skipped"] = r.skipped;
  j["majority"] = r.majority;
  j["per_distance"] = BucketsJson(r.per_distance);
  j["per_attractors"] = BucketsJson(r.per_attractors);
  return j;
}

NAResult NaFromJson(const nlohmann::json& j) {
  NAResult r;
  r.accuracy = j.at("accuracy").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.correct = j.at("correct").get<std::size_t>();
  r.ties = j.at("ties").get<std::size_t>();
  r.skipped = j.at("skipped").get<std::size_t>();
  r.majority = j.at("majority").get<double>();
  for (const auto& b : j.at("per_distance")) {
    const auto n = b.at("n").get<std::size_t>();
    r.per_distance[b.at("key").get<int>()] = {
        static_cast<std::size_t>(std::llround(b.at("accuracy").get<double>() * n)), n};
  }
  for (const auto& b : j.at("per_attractors")) {
    const auto n = b.at("n").get<std::size_t>();
    r.per_attractors[b.at("key").get<int>()] = {
        static_cast<std::size_t>(std::llround(b.at("accuracy").get<double>() * n)), n};
  }
  return r;
}

std::string Join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + "\n";
}

}  // namespace

std::string FormatNumber(double x) {
  if (!std::isfinite(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string NAResultJson(const NAResult& r) { return NaJson(r).dump(); }

std::string ProbeReportCsv(const std::vector<ProbeReportRow>& rows) {
  std::string out =
      "category,layer,h_v,h_v_cond,i_v,u_v,accuracy,h_v_bits,i_v_bits\n";
  for (const auto& r : rows) {
    out += Join({std::string(ToString(r.category)), std::to_string(r.layer),
                 FormatNumber(r.v.h_v), FormatNumber(r.v.h_v_cond),
                 FormatNumber(r.v.i_v), r.v.u_v ? FormatNumber(*r.v.u_v) : "",
                 FormatNumber(r.v.accuracy), FormatNumber(NatsToBits(r.v.h_v)),
                 FormatNumber(NatsToBits(r.v.i_v))});
  }
  return out;
}

std::string CosineCsv(const std::vector<std::string>& labels,
                      const Eigen::MatrixXd& c) {
  if (static_cast<Eigen::Index>(labels.size()) != c.rows() || c.rows() != c.cols()) {
    throw Error(ErrorKind::kShape, "cosine labels do not match the matrix");
  }
  std::vector<std::string> head{"probe"};
  head.insert(head.end(), labels.begin(), labels.end());
  std::string out = Join(head);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    std::vector<std::string> row{labels[i]};
    for (Eigen::Index j = 0; j < c.cols(); ++j) row.push_back(FormatNumber(c(i, j)));
    out += Join(row);
  }
  return out;
}

std::string CrossEvalCsv(const CrossEvalResult& result) {
  std::string out = "probe_category,set_category,layer,accuracy,majority,per_lemma_majority\n";
  for (const auto& e : result.entries) {
    const auto it = result.baselines.find({e.set_category, e.layer});
    const Baseline b = it == result.baselines.end() ? Baseline{} : it->second;
    out += Join({std::string(ToString(e.probe_category)),
                 std::string(ToString(e.set_category)), std::to_string(e.layer),
                 FormatNumber(e.accuracy), FormatNumber(b.majority),
                 FormatNumber(b.per_lemma_majority)});
  }
  return out;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out =
      "layer,category,position_kind,baseline_acc,intervened_acc,drop,"
      "random_control_drop,k_directions\n";
  for (const auto& r : rows) {
    out += Join({std::to_string(r.layer), std::string(ToString(r.category)),
                 std::string(ToString(r.position)),
                 FormatNumber(r.amnesic.baseline.accuracy),
                 FormatNumber(r.amnesic.intervened.accuracy),
                 FormatNumber(r.amnesic.drop), FormatNumber(r.random_control.drop),
                 std::to_string(r.k)});
  }
  return out;
}

std::string SweepJson(const std::vector<SweepRow>& rows) {
  ordered_json j;
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json e;
    e["layer"] = r.layer;
    e["category"] = std::string(ToString(r.category));
    e["position_kind"] = std::string(ToString(r.position));
    e["k_directions"] = r.k;
    e["drop"] = r.amnesic.drop;
    e["random_control_drop"] = r.random_control.drop;
    e["majority_gap"] = r.amnesic.majority_gap;
    e["extractability_loss"] = Num(r.extractability_loss);
    e["random_extractability_loss"] = Num(r.random_extractability_loss);
    e["baseline"] = NaJson(r.amnesic.baseline);
    e["intervened"] = NaJson(r.amnesic.intervened);
    e["random_control"] = NaJson(r.random_control.intervened);
    arr.push_back(e);
  }
  j["rows"] = arr;
  return j.dump(1);
}

std::vector<SweepRow> SweepFromJson(const std::string& text) {
  std::vector<SweepRow> rows;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& e : j.at("rows")) {
      SweepRow r;
      r.layer = e.at("layer").get<int>();
      r.category = ParseCategory(e.at("category").get<std::string>());
      r.position = ParsePositionKind(e.at("position_kind").get<std::string>());
      r.k = e.at("k_directions").get<int>();
      const NAResult base = NaFromJson(e.at("baseline"));
      r.amnesic = MakeDrop(base, NaFromJson(e.at("intervened")));
      r.random_control = MakeDrop(base, NaFromJson(e.at("random_control")));
      r.extractability_loss = NumOr(e, "extractability_loss");
      r.random_extractability_loss = NumOr(e, "random_extractability_loss");
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("sweep file: ") + e.what());
  }
  return rows;
}

std::string CrossSweepCsv(const std::vector<CrossCell>& cells) {
  std::string out =
      "category,layer,position_kind,k_directions,baseline_acc,intervened_acc,drop\n";
  for (const auto& c : cells) {
    out += Join({std::string(ToString(c.category)), std::to_string(c.layer),
                 std::string(ToString(c.position)), std::to_string(c.k),
                 FormatNumber(c.report.baseline.accuracy),
                 FormatNumber(c.report.intervened.accuracy),
                 FormatNumber(c.report.drop)});
  }
  return out;
}

std::string InfoLossCsv(const InfoLossMatrix& m) {
  std::string out =
      "intervened_layer,read_layer,baseline_accuracy,intervened_accuracy,loss\n";
  for (const auto& r : m.rows) {
    for (std::size_t j = 0; j < r.loss.size(); ++j) {
      if (!std::isfinite(r.loss[j])) continue;
      out += Join({std::to_string(r.layer), std::to_string(j),
                   FormatNumber(m.baseline_accuracy[j]),
                   FormatNumber(r.intervened_accuracy[j]), FormatNumber(r.loss[j])});
    }
  }
  return out;
}

std::string InfoLossJson(const InfoLossMatrix& m) {
  ordered_json j;
  j["probe_category"] = std::string(ToString(m.probe_category));
  j["position_kind"] = std::string(ToString(m.position));
  j["projector_category"] = std::string(ToString(m.projector_category));
  j["random_control"] = m.random_control;
  j["baseline_accuracy"] = m.baseline_accuracy;
  ordered_json rows = ordered_json::array();
  for (const auto& r : m.rows) {
    ordered_json loss = ordered_json::array(), acc = ordered_json::array();
    for (double x : r.loss) loss.push_back(Num(x));
    for (double x : r.intervened_accuracy) acc.push_back(Num(x));
    rows.push_back({{"intervened_layer", r.layer}, {"loss", loss},
                    {"intervened_accuracy", acc}});
  }
  j["rows"] = rows;
  return j.dump(1);
}

InfoLossMatrix InfoLossFromJson(const std::string& text) {
  InfoLossMatrix m;
  auto nums = [](const nlohmann::json& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(x.is_null() ? std::nan("") : x.get<double>());
    return v;
  };
  try {
    const auto j = nlohmann::json::parse(text);
    m.probe_category = ParseCategory(j.at("probe_category").get<std::string>());
    m.position = ParsePositionKind(j.at("position_kind").get<std::string>());
    m.projector_category = ParseCategory(j.at("projector_category").get<std::string>());
    m.random_control = j.at("random_control").get<bool>();
    m.baseline_accuracy = nums(j.at("baseline_accuracy"));
    for (const auto& r : j.at("rows")) {
      InfoLossRow row;
      row.layer = r.at("intervened_layer").get<int>();
      row.loss = nums(r.at("loss"));
      row.intervened_accuracy = nums(r.at("intervened_accuracy"));
      m.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("info-loss file: ") + e.what());
  }
  return m;
}

std::string AttentionCsv(const std::vector<RangeSweep>& sweeps) {
  std::string out = "kind,i,j,accuracy,drop,n\n";
  for (const auto& s : sweeps) {
    for (Eigen::Index i = 0; i < s.accuracy.rows(); ++i) {
      for (Eigen::Index j = i; j < s.accuracy.cols(); ++j) {
        out += Join({std::string(ToString(s.kind)), std::to_string(i),
                     std::to_string(j), FormatNumber(s.accuracy(i, j)),
                     FormatNumber(s.drop(i, j)),
                     std::to_string(s.results[i][j].n)});
      }
    }
  }
  return out;
}

std::string AttentionJson(const std::vector<RangeSweep>& sweeps) {
  ordered_json j;
  j["conventions"] =
      "i and j are 0-based transformer block indices (L blocks); hidden-state "
      "layers elsewhere run 0..L with 0 the token embedding";
  if (!sweeps.empty()) j["baseline_accuracy"] = sweeps.front().baseline.accuracy;
  for (const auto& s : sweeps) {
    ordered_json m = ordered_json::array();
    for (Eigen::Index i = 0; i < s.drop.rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index k = 0; k < s.drop.cols(); ++k) row.push_back(Num(s.drop(i, k)));
      m.push_back(row);
    }
    j[std::string(ToString(s.kind))] = m;
  }
  return j.dump(1);
}

std::string DistanceCsv(const DistanceTable& t) {
  std::vector<std::string> head{"distance", "n"};
  head.insert(head.end(), t.columns.begin(), t.columns.end());
  std::string out = Join(head);
  for (std::size_t r = 0; r < t.distances.size(); ++r) {
    std::size_t n = 0;
    for (const auto& c : t.counts) n = std::max(n, c[r]);
    std::vector<std::string> row{std::to_string(t.distances[r]), std::to_string(n)};
    for (const auto& c : t.accuracy) row.push_back(FormatNumber(c[r]));
    out += Join(row);
  }
  return out;
}

namespace {

struct Table2Row {
  const char* label;
  std::string (*cell)(const SweepRow&);
};

const Table2Row kTable2Rows[] = {
    {"Number of Directions", [](const SweepRow& r) { return std::to_string(r.k); }},
    {"Loss in Layers", [](const SweepRow& r) { return FormatNumber(r.extractability_loss); }},
    {"Loss in Layers (Random)",
     [](const SweepRow& r) { return FormatNumber(r.random_extractability_loss); }},
    {"NA Performance Drop", [](const SweepRow& r) { return FormatNumber(r.amnesic.drop); }},
    {"NA Performance Drop (Random)",
     [](const SweepRow& r) { return FormatNumber(r.random_control.drop); }},
};

}  // namespace

std::string Table2Csv(const std::vector<Table2Block>& blocks) {
  int max_layer = -1;
  for (const auto& b : blocks) {
    for (const auto& r : b.rows) max_layer = std::max(max_layer, r.layer);
  }
  std::vector<std::string> head{"category", "row"};
  for (int l = 0; l <= max_layer; ++l) head.push_back(std::to_string(l));
  std::string out = Join(head);
  for (const auto& b : blocks) {
    for (const auto& spec : kTable2Rows) {
      std::vector<std::string> row{b.title, spec.label};
      for (int l = 0; l <= max_layer; ++l) {
        std::string cell;
        for (const auto& r : b.rows) {
          if (r.layer == l) cell = spec.cell(r);
        }
        row.push_back(cell);
      }
      out += Join(row);
    }
  }
  return out;
}

std::string Table2Json(const std::vector<Table2Block>& blocks) {
  ordered_json j = ordered_json::array();
  for (const auto& b : blocks) {
    ordered_json e;
    e["category"] = b.title;
    ordered_json layers = ordered_json::array(), k = ordered_json::array(),
                 loss = ordered_json::array(), loss_r = ordered_json::array(),
                 drop = ordered_json::array(), drop_r = ordered_json::array();
    for (const auto& r : b.rows) {
      layers.push_back(r.layer);
      k.push_back(r.k);
      loss.push_back(Num(r.extractability_loss));
      loss_r.push_back(Num(r.random_extractability_loss));
      drop.push_back(r.amnesic.drop);
      drop_r.push_back(r.random_control.drop);
    }
    e["layers"] = layers;
    e["Number of Directions"] = k;
    e["Loss in Layers"] = loss;
    e["Loss in Layers (Random)"] = loss_r;
    e["NA Performance Drop"] = drop;
    e["NA Performance Drop (Random)"] = drop_r;
    j.push_back(e);
  }
  return j.dump(1);
}

}  // namespace uprobe
