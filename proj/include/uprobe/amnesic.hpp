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

#ifndef UPROBE_AMNESIC_HPP_
#define UPROBE_AMNESIC_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "uprobe/probes.hpp"
#include "uprobe/representations.hpp"

namespace uprobe {

enum class StopReason { kConverged, kCap, kRandom };

std::string_view ToString(StopReason r);  // "converged", "cap", "random"
StopReason ParseStopReason(std::string_view text);

struct StoppingRule {
  double eps = 0.005;  // stop once dev accuracy <= majority + eps
  int max_iterations = 64;
};

// Directions are kept as trained (unnormalized); composed = P_k ... P_1.
struct AmnesicProjector {
  std::vector<Eigen::VectorXd> directions;
  Eigen::MatrixXd composed;
  Category category = Category::kNoun;
  int layer = 0;
  StopReason stop_reason = StopReason::kConverged;
  double majority = 0.0;
  double eps = 0.0;
  // Dev accuracy of the probe trained at each iteration, including the
  // final one that triggered the stop (not stored in PROJ files).
  std::vector<double> dev_accuracies;

  int k() const { return static_cast<int>(directions.size()); }
  int dim() const { return static_cast<int>(composed.rows()); }
};

// I - theta theta^T / |theta|^2. Throws Error(kDegenerate) on a zero vector.
Eigen::MatrixXd NullspaceProjector(const Eigen::Ref<const Eigen::VectorXd>& theta);

// Iterative nullspace projection. Probes are refit on the projected train
// rows each round; the bias is never projected. Throws Error(kDegenerate)
// when either set lacks a class and Error(kShape) on a dimension mismatch.
AmnesicProjector Inlp(const RepresentationSet& train,
                      const RepresentationSet& dev,
                      const StoppingRule& stop = {},
                      const ProbeHyper& hyper = {});

// k orthonormal directions from the QR factorization of a seeded Gaussian
// d x k matrix. Throws Error(kConfig) unless 0 <= k <= d.
AmnesicProjector RandomProjector(int d, int k, std::uint64_t seed);

// Rows r -> composed * r. Throws Error(kShape) on a dimension mismatch.
RepresentationSet ApplyProjection(const RepresentationSet& reps,
                                  const AmnesicProjector& proj);
Eigen::MatrixXd ApplyProjectionDense(const Eigen::MatrixXd& rows,
                                     const Eigen::MatrixXd& composed);

// PROJ binary: "PROJ", u32 version, u32 d, u32 k, k f32 directions, d x d
// f32 composed (row-major), JSON trailer
// {category, layer, stop_reason, majority, eps}.
void SaveProjector(const AmnesicProjector& proj, const std::string& path);
AmnesicProjector LoadProjector(const std::string& path);

}  // namespace uprobe

#endif  // UPROBE_AMNESIC_HPP_
