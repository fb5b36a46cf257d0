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

#include "uprobe/amnesic.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <Eigen/QR>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "uprobe/binio.hpp"
#include "uprobe/errors.hpp"

namespace uprobe {
namespace {

constexpr std::uint32_t kProjVersion = 1;

void RequireBothClasses(std::span<const NumberLabel> labels,
                        std::string_view which) {
  bool sg = false, pl = false;
  for (auto l : labels) (l == NumberLabel::kSingular ? sg : pl) = true;
  if (!sg || !pl) {
    throw Error(ErrorKind::kDegenerate,
                std::string(which) + " set must contain both number classes");
  }
}

}  // namespace

std::string_view ToString(StopReason r) {
  switch (r) {
    case StopReason::kConverged: return "converged";
    case StopReason::kCap: return "cap";
    case StopReason::kRandom: return "random";
  }
  return "converged";
}

StopReason ParseStopReason(std::string_view text) {
  if (text == "converged") return StopReason::kConverged;
  if (text == "cap") return StopReason::kCap;
  if (text == "random") return StopReason::kRandom;
  throw Error(ErrorKind::kParse, "unknown stop_reason \"" + std::string(text) + "\"");
}

Eigen::MatrixXd NullspaceProjector(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const double sq = theta.squaredNorm();
  if (!(sq > 0.0) || !std::isfinite(sq)) {
    throw Error(ErrorKind::kDegenerate, "nullspace of a zero direction");
  }
  const auto d = theta.size();
  return Eigen::MatrixXd::Identity(d, d) - theta * theta.transpose() / sq;
}

Eigen::MatrixXd ApplyProjectionDense(const Eigen::MatrixXd& rows,
                                     const Eigen::MatrixXd& composed) {
  if (rows.cols() != composed.cols()) {
    throw Error(ErrorKind::kShape, "projector dimension " +
                                       std::to_string(composed.cols()) +
                                       " does not match data dimension " +
                                       std::to_string(rows.cols()));
  }
  return rows * composed.transpose();
}

AmnesicProjector Inlp(const RepresentationSet& train,
                      const RepresentationSet& dev, const StoppingRule& stop,
                      const ProbeHyper& hyper) {
  ValidateRepresentations(train);
  ValidateRepresentations(dev);
  if (train.dim() != dev.dim()) {
    throw Error(ErrorKind::kShape, "train and dev dimensions differ");
  }
  if (stop.max_iterations < 0 || stop.eps < 0.0) {
    throw Error(ErrorKind::kConfig, "invalid INLP stopping rule");
  }
  RequireBothClasses(train.labels, "INLP train");
  RequireBothClasses(dev.labels, "INLP dev");

  const int d = train.dim();
  AmnesicProjector out;
  out.category = train.category;
  out.layer = train.layer;
  out.eps = stop.eps;
  out.majority = MajorityRate(dev);
  out.composed = Eigen::MatrixXd::Identity(d, d);

  Eigen::MatrixXd xtr = train.rows.cast<double>();
  Eigen::MatrixXd xdev = dev.rows.cast<double>();
  for (;;) {
    const ProbeParams probe = TrainProbeDense(xtr, train.labels, hyper);
    const double acc = AccuracyDense(probe, xdev, dev.labels);
    out.dev_accuracies.push_back(acc);
    spdlog::debug("inlp {}@{} iteration {} dev accuracy {:.4f}",
                  ToString(train.category), train.layer, out.k(), acc);
    if (acc <= out.majority + stop.eps || !(probe.theta.squaredNorm() > 0.0)) {
      out.stop_reason = StopReason::kConverged;
      break;
    }
    if (out.k() >= stop.max_iterations) {
      out.stop_reason = StopReason::kCap;
      spdlog::warn(
          "INLP for {} at layer {} hit the {}-direction cap (dev accuracy "
          "{:.4f}, majority {:.4f})",
          ToString(train.category), train.layer, stop.max_iterations, acc,
          out.majority);
      break;
    }
    // The probe only sees projected rows, so its effective direction is
    // composed * theta; rounding can otherwise leak removed directions back.
    const Eigen::VectorXd theta = out.composed * probe.theta;
    if (!(theta.squaredNorm() > 0.0)) {
      out.stop_reason = StopReason::kConverged;
      break;
    }
    const Eigen::MatrixXd p = NullspaceProjector(theta);
    out.directions.push_back(theta);
    out.composed = p * out.composed;
    xtr = xtr * p;  // p is symmetric
    xdev = xdev * p;
  }
  spdlog::info("INLP {}@{}: k = {} ({})", ToString(train.category),
               train.layer, out.k(), ToString(out.stop_reason));
  return out;
}

AmnesicProjector RandomProjector(int d, int k, std::uint64_t seed) {
  if (d <= 0 || k < 0 || k > d) {
    throw Error(ErrorKind::kConfig, "random projector needs 0 <= k <= d, got k=" +
                                        std::to_string(k) + " d=" + std::to_string(d));
  }
  AmnesicProjector out;
  out.stop_reason = StopReason::kRandom;
  out.composed = Eigen::MatrixXd::Identity(d, d);
  if (k == 0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(d, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  for (int j = 0; j < k; ++j) {
    out.directions.push_back(q.col(j));
    out.composed = NullspaceProjector(q.col(j)) * out.composed;
  }
  return out;
}

RepresentationSet ApplyProjection(const RepresentationSet& reps,
                                  const AmnesicProjector& proj) {
  ValidateRepresentations(reps);
  RepresentationSet out = reps;
  out.rows = ApplyProjectionDense(reps.rows.cast<double>(), proj.composed)
                 .cast<float>();
  return out;
}

void SaveProjector(const AmnesicProjector& proj, const std::string& path) {
  const int d = proj.dim();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  binio::WriteMagic(out, "PROJ");
  binio::WriteU32(out, kProjVersion);
  binio::WriteU32(out, static_cast<std::uint32_t>(d));
  binio::WriteU32(out, static_cast<std::uint32_t>(proj.k()));
  for (const auto& theta : proj.directions) {
    if (theta.size() != d) {
      throw Error(ErrorKind::kShape, "projector direction has the wrong length");
    }
    for (int i = 0; i < d; ++i) binio::WriteF32(out, static_cast<float>(theta(i)));
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      binio::WriteF32(out, static_cast<float>(proj.composed(i, j)));
    }
  }
  nlohmann::ordered_json trailer;
  trailer["category"] = std::string(ToString(proj.category));
  trailer["layer"] = proj.layer;
  trailer["stop_reason"] = std::string(ToString(proj.stop_reason));
  trailer["majority"] = proj.majority;
  trailer["eps"] = proj.eps;
  out << trailer.dump();
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

AmnesicProjector LoadProjector(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  binio::ExpectMagic(in, "PROJ", "projector");
  const auto version = binio::ReadU32(in, "projector");
  if (version != kProjVersion) {
    throw Error(ErrorKind::kParse,
                "unsupported projector version " + std::to_string(version));
  }
  const auto d = static_cast<int>(binio::ReadU32(in, "projector"));
  const auto k = static_cast<int>(binio::ReadU32(in, "projector"));
  if (k > d) throw Error(ErrorKind::kParse, "projector has k > d");
  AmnesicProjector p;
  for (int r = 0; r < k; ++r) {
    Eigen::VectorXd theta(d);
    for (int i = 0; i < d; ++i) theta(i) = binio::ReadF32(in, "projector");
    p.directions.push_back(std::move(theta));
  }
  p.composed.resize(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) p.composed(i, j) = binio::ReadF32(in, "projector");
  }
  try {
    const auto t = nlohmann::json::parse(binio::ReadRest(in));
    p.category = ParseCategory(t.at("category").get<std::string>());
    p.layer = t.at("layer").get<int>();
    p.stop_reason = ParseStopReason(t.at("stop_reason").get<std::string>());
    p.majority = t.at("majority").get<double>();
    p.eps = t.at("eps").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, "projector trailer: " + std::string(e.what()));
  }
  return p;
}

}  // namespace uprobe
