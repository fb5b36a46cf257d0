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

#ifndef UPROBE_PROBES_HPP_
#define UPROBE_PROBES_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "uprobe/number.hpp"
#include "uprobe/representations.hpp"

namespace uprobe {

struct ProbeHyper {
  int max_iterations = 1000;
  double grad_tol = 1e-6;  // on the infinity norm of the mean-loss gradient

  bool operator==(const ProbeHyper&) const = default;
};

// Linear probe p(singular | r) = sigmoid(theta . r + bias).
struct ProbeParams {
  Eigen::VectorXd theta;
  double bias = 0.0;
  Category category = Category::kNoun;
  int layer = 0;
  double final_loss = 0.0;  // mean training loss, nats
  int iterations = 0;
  bool converged = false;
  double dev_accuracy = 0.0;

  int dim() const { return static_cast<int>(theta.size()); }
};

// Unregularized mean logistic loss minimized with damped Newton steps from
// theta = 0, bias = log-odds of the training prior. Stops when the gradient
// infinity norm drops to grad_tol or after max_iterations.
// Throws Error(kDegenerate) if train holds a single class, Error(kShape) if
// train/dev dimensions differ.
ProbeParams TrainProbe(const RepresentationSet& train,
                       const RepresentationSet& dev,
                       const ProbeHyper& hyper = {});

// Double-precision entry point used by iterative nullspace projection.
ProbeParams TrainProbeDense(const Eigen::MatrixXd& x,
                            std::span<const NumberLabel> labels,
                            const ProbeHyper& hyper = {});

double ProbeLogit(const ProbeParams& probe, const Eigen::Ref<const Eigen::VectorXd>& r);
// Singular iff the logit is strictly positive.
NumberLabel Predict(const ProbeParams& probe,
                    const Eigen::Ref<const Eigen::VectorXd>& r);
double Accuracy(const ProbeParams& probe, const RepresentationSet& eval);
double AccuracyDense(const ProbeParams& probe, const Eigen::MatrixXd& x,
                     std::span<const NumberLabel> labels);

// Entropy (nats) of the empirical label prior: the best constant predictor.
double VEntropy(std::span<const NumberLabel> labels);

// Mean negative log-likelihood (nats) of eval labels under the probe.
double VConditionalEntropy(const ProbeParams& probe,
                           const RepresentationSet& eval);
double MeanLogLoss(const ProbeParams& probe, const Eigen::MatrixXd& x,
                   std::span<const NumberLabel> labels);

struct VInformation {
  double h_v = 0.0;        // H_V(N)
  double h_v_cond = 0.0;   // H_V(N | R)
  double i_v = 0.0;        // max(0, h_v - h_v_cond)
  double i_v_raw = 0.0;    // before clamping
  std::optional<double> u_v;  // i_v / h_v, empty when h_v = 0
  double accuracy = 0.0;
};

VInformation ComputeVInformation(const ProbeParams& probe,
                                 const RepresentationSet& eval);

// I_V / H_V(N); throws Error(kDegenerate) when the labels are constant.
double VUncertainty(const ProbeParams& probe, const RepresentationSet& eval);

inline double NatsToBits(double nats) { return nats / 0.69314718055994530942; }

// Cosines between probe directions (bias ignored). Exact 1.0 diagonal.
// Throws Error(kDegenerate) on a zero theta and Error(kShape) on mixed d.
Eigen::MatrixXd CosineMatrix(std::span<const ProbeParams> probes);

using ProbeKey = std::pair<Category, int>;  // (category, layer)

struct CrossEvalEntry {
  Category probe_category;
  Category set_category;
  int layer;
  double accuracy;
};

struct Baseline {
  double majority = 0.0;
  double per_lemma_majority = 0.0;
};

struct CrossEvalResult {
  std::vector<CrossEvalEntry> entries;
  std::map<ProbeKey, Baseline> baselines;  // keyed by evaluation set

  std::optional<double> Find(Category probe, Category set, int layer) const;
};

// Accuracy of every probe on every set of the same layer.
CrossEvalResult CrossEvaluate(const std::map<ProbeKey, ProbeParams>& probes,
                              const std::map<ProbeKey, RepresentationSet>& sets);

// Probe JSON: {category, layer, d, theta, bias, final_loss, iterations}.
std::string ProbeToJson(const ProbeParams& probe);
ProbeParams ProbeFromJson(const std::string& text);
void SaveProbe(const ProbeParams& probe, const std::string& path);
ProbeParams LoadProbe(const std::string& path);

}  // namespace uprobe

#endif  // UPROBE_PROBES_HPP_
