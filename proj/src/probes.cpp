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

#include "uprobe/probes.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "uprobe/binio.hpp"
#include "uprobe/errors.hpp"

namespace uprobe {
namespace {

constexpr double kHessianDamping = 1e-10;

double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd ToDense(const RepresentationSet& reps) {
  return reps.rows.cast<double>();
}

Eigen::VectorXd Targets(std::span<const NumberLabel> labels) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = AsTarget(labels[i]);
  }
  return y;
}

double MeanLoss(const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += Softplus(z(i)) - y(i) * z(i);
  return s / static_cast<double>(z.size());
}

}  // namespace

ProbeParams TrainProbeDense(const Eigen::MatrixXd& x,
                            std::span<const NumberLabel> labels,
                            const ProbeHyper& hyper) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorKind::kShape, "label count does not match row count");
  }
  const auto n = x.rows();
  const auto d = x.cols();
  const Eigen::VectorXd y = Targets(labels);
  const double prior = y.mean();
  if (n == 0 || prior <= 0.0 || prior >= 1.0) {
    throw Error(ErrorKind::kDegenerate,
                "probe training set must contain both number classes");
  }

  // Parameters packed as [theta; bias].
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  w(d) = std::log(prior / (1.0 - prior));
  auto logits = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return (x * p.head(d)).array() + p(d);
  };

  ProbeParams out;
  Eigen::VectorXd z = logits(w);
  double loss = MeanLoss(z, y);
  int it = 0;
  for (; it < hyper.max_iterations; ++it) {
    Eigen::VectorXd resid(n), weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = Sigmoid(z(i));
      resid(i) = s - y(i);
      weight(i) = s * (1.0 - s);
    }
    Eigen::VectorXd grad(d + 1);
    grad.head(d) = x.transpose() * resid / static_cast<double>(n);
    grad(d) = resid.mean();
    if (grad.lpNorm<Eigen::Infinity>() <= hyper.grad_tol) {
      out.converged = true;
      break;
    }
    Eigen::MatrixXd hess(d + 1, d + 1);
    const Eigen::MatrixXd xw = x.array().colwise() * weight.array();
    hess.topLeftCorner(d, d) = x.transpose() * xw / static_cast<double>(n);
    const Eigen::VectorXd cross = xw.colwise().sum().transpose() / static_cast<double>(n);
    hess.topRightCorner(d, 1) = cross;
    hess.bottomLeftCorner(1, d) = cross.transpose();
    hess(d, d) = weight.mean();
    hess.diagonal().array() += kHessianDamping;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    const double slope = grad.dot(step);

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd cand = w - t * step;
      const Eigen::VectorXd zc = logits(cand);
      const double lc = MeanLoss(zc, y);
      if (std::isfinite(lc) && lc <= loss - 1e-4 * t * slope) {
        w = cand;
        z = zc;
        loss = lc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no further progress in floating point
  }
  out.theta = w.head(d);
  out.bias = w(d);
  out.final_loss = loss;
  out.iterations = it;
  return out;
}

ProbeParams TrainProbe(const RepresentationSet& train,
                       const RepresentationSet& dev, const ProbeHyper& hyper) {
  ValidateRepresentations(train);
  if (dev.size() > 0 && dev.dim() != train.dim()) {
    throw Error(ErrorKind::kShape, "train and dev dimensions differ");
  }
  ProbeParams p = TrainProbeDense(ToDense(train), train.labels, hyper);
  p.category = train.category;
  p.layer = train.layer;
  if (dev.size() > 0) p.dev_accuracy = Accuracy(p, dev);
  return p;
}

double ProbeLogit(const ProbeParams& probe,
                  const Eigen::Ref<const Eigen::VectorXd>& r) {
  return probe.theta.dot(r) + probe.bias;
}

NumberLabel Predict(const ProbeParams& probe,
                    const Eigen::Ref<const Eigen::VectorXd>& r) {
  return ProbeLogit(probe, r) > 0.0 ? NumberLabel::kSingular
                                    : NumberLabel::kPlural;
}

double AccuracyDense(const ProbeParams& probe, const Eigen::MatrixXd& x,
                     std::span<const NumberLabel> labels) {
  if (x.cols() != probe.theta.size()) {
    throw Error(ErrorKind::kShape, "probe dimension does not match data");
  }
  if (labels.empty()) return 0.0;
  const Eigen::VectorXd z = (x * probe.theta).array() + probe.bias;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const NumberLabel pred = z(static_cast<Eigen::Index>(i)) > 0.0
                                 ? NumberLabel::kSingular
                                 : NumberLabel::kPlural;
    hits += (pred == labels[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double Accuracy(const ProbeParams& probe, const RepresentationSet& eval) {
  return AccuracyDense(probe, ToDense(eval), eval.labels);
}

double VEntropy(std::span<const NumberLabel> labels) {
  if (labels.empty()) {
    throw Error(ErrorKind::kData, "entropy of an empty label set");
  }
  const double p =
      static_cast<double>(std::count(labels.begin(), labels.end(),
                                     NumberLabel::kSingular)) /
      static_cast<double>(labels.size());
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

double MeanLogLoss(const ProbeParams& probe, const Eigen::MatrixXd& x,
                   std::span<const NumberLabel> labels) {
  if (x.cols() != probe.theta.size()) {
    throw Error(ErrorKind::kShape, "probe dimension does not match data");
  }
  if (labels.empty()) throw Error(ErrorKind::kData, "empty evaluation set");
  const Eigen::VectorXd z = (x * probe.theta).array() + probe.bias;
  return MeanLoss(z, Targets(labels));
}

double VConditionalEntropy(const ProbeParams& probe,
                           const RepresentationSet& eval) {
  return MeanLogLoss(probe, ToDense(eval), eval.labels);
}

VInformation ComputeVInformation(const ProbeParams& probe,
                                 const RepresentationSet& eval) {
  VInformation v;
  v.h_v = VEntropy(eval.labels);
  v.h_v_cond = VConditionalEntropy(probe, eval);
  v.i_v_raw = v.h_v - v.h_v_cond;
  v.i_v = std::max(0.0, v.i_v_raw);
  if (v.h_v > 0.0) v.u_v = std::clamp(v.i_v / v.h_v, 0.0, 1.0);
  v.accuracy = Accuracy(probe, eval);
  return v;
}

double VUncertainty(const ProbeParams& probe, const RepresentationSet& eval) {
  const VInformation v = ComputeVInformation(probe, eval);
  if (!v.u_v) {
    throw Error(ErrorKind::kDegenerate,
                "V-uncertainty undefined for constant labels (H_V(N) = 0)");
  }
  return *v.u_v;
}

Eigen::MatrixXd CosineMatrix(std::span<const ProbeParams> probes) {
  const auto k = static_cast<Eigen::Index>(probes.size());
  Eigen::MatrixXd c(k, k);
  if (k == 0) return c;
  const auto d = probes[0].theta.size();
  std::vector<double> norms;
  for (const auto& p : probes) {
    if (p.theta.size() != d) {
      throw Error(ErrorKind::kShape, "probes have different dimensions");
    }
    const double nrm = p.theta.norm();
    if (!(nrm > 0.0)) {
      throw Error(ErrorKind::kDegenerate, "probe with zero-norm theta");
    }
    norms.push_back(nrm);
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double v = std::clamp(
          probes[i].theta.dot(probes[j].theta) / (norms[i] * norms[j]), -1.0,
          1.0);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

std::optional<double> CrossEvalResult::Find(Category probe, Category set,
                                             int layer) const {
  for (const auto& e : entries) {
    if (e.probe_category == probe && e.set_category == set && e.layer == layer) {
      return e.accuracy;
    }
  }
  return std::nullopt;
}

CrossEvalResult CrossEvaluate(
    const std::map<ProbeKey, ProbeParams>& probes,
    const std::map<ProbeKey, RepresentationSet>& sets) {
  CrossEvalResult out;
  for (const auto& [skey, set] : sets) {
    out.baselines[skey] = {MajorityRate(set), PerLemmaMajorityRate(set)};
  }
  for (const auto& [pkey, probe] : probes) {
    for (const auto& [skey, set] : sets) {
      if (skey.second != pkey.second) continue;
      if (set.dim() != probe.dim()) {
        throw Error(ErrorKind::kShape, "probe and set dimensions differ");
      }
      out.entries.push_back(
          {pkey.first, skey.first, pkey.second, Accuracy(probe, set)});
    }
  }
  return out;
}

std::string ProbeToJson(const ProbeParams& p) {
  nlohmann::ordered_json j;
  j["category"] = std::string(ToString(p.category));
  j["layer"] = p.layer;
  j["d"] = p.dim();
  std::vector<float> theta(p.theta.data(), p.theta.data() + p.theta.size());
  j["theta"] = theta;
  j["bias"] = p.bias;
  j["final_loss"] = p.final_loss;
  j["iterations"] = p.iterations;
  j["converged"] = p.converged;
  j["dev_accuracy"] = p.dev_accuracy;
  return j.dump();
}

ProbeParams ProbeFromJson(const std::string& text) {
  ProbeParams p;
  try {
    const auto j = nlohmann::json::parse(text);
    p.category = ParseCategory(j.at("category").get<std::string>());
    p.layer = j.at("layer").get<int>();
    const auto theta = j.at("theta").get<std::vector<double>>();
    if (static_cast<int>(theta.size()) != j.at("d").get<int>()) {
      throw Error(ErrorKind::kShape, "probe theta length differs from d");
    }
    p.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                static_cast<Eigen::Index>(theta.size()));
    p.bias = j.at("bias").get<double>();
    p.final_loss = j.at("final_loss").get<double>();
    p.iterations = j.at("iterations").get<int>();
    p.converged = j.value("converged", false);
    p.dev_accuracy = j.value("dev_accuracy", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("probe file: ") + e.what());
  }
  return p;
}

void SaveProbe(const ProbeParams& probe, const std::string& path) {
  binio::WriteFileText(path, ProbeToJson(probe) + "\n");
}

ProbeParams LoadProbe(const std::string& path) {
  return ProbeFromJson(binio::ReadFileText(path));
}

}  // namespace uprobe
