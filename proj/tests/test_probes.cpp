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

#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "uprobe/probes.hpp"

using namespace uprobe;
using uprobe::testing::KindOf;
using uprobe::testing::SignSet;
using uprobe::testing::TempDir;

namespace {

RepresentationSet FromToy(const oracle::ToySet& t) {
  RepresentationSet r;
  r.rows = t.x.cast<float>();
  for (std::size_t i = 0; i < t.y.size(); ++i) {
    r.labels.push_back(t.y[i] == 1 ? NumberLabel::kSingular : NumberLabel::kPlural);
    r.positions.push_back(0);
    r.lemmas.push_back("l" + std::to_string(i));
  }
  return r;
}

// Overlapping Gaussian classes: finite optimum, clear direction.
RepresentationSet NoisySet(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.f, 1.f);
  RepresentationSet r;
  r.rows.resize(n, d);
  for (int i = 0; i < n; ++i) {
    const bool sg = i % 2 == 0;
    for (int j = 0; j < d; ++j) r.rows(i, j) = normal(rng);
    r.rows(i, 0) += sg ? 0.7f : -0.7f;
    r.rows(i, 1) += sg ? -0.4f : 0.4f;
    r.labels.push_back(sg ? NumberLabel::kSingular : NumberLabel::kPlural);
    r.positions.push_back(0);
    r.lemmas.push_back("l");
  }
  return r;
}

ProbeParams Fixed(Eigen::VectorXd theta, double bias) {
  ProbeParams p;
  p.theta = std::move(theta);
  p.bias = bias;
  return p;
}

}  // namespace

TEST_CASE("separable blobs are classified perfectly") {
  const auto train = SignSet(200, 2, 1);
  const auto dev = SignSet(100, 2, 2);
  const ProbeParams p = TrainProbe(train, dev);
  CHECK(p.dev_accuracy == 1.0);
  CHECK(Accuracy(p, dev) == 1.0);
}

TEST_CASE("all-zero representations give the prior class") {
  RepresentationSet r = SignSet(30, 4, 3);
  r.rows.setZero();
  r.labels[1] = NumberLabel::kSingular;  // 16 singular, 14 plural
  const ProbeParams p = TrainProbe(r, r);
  for (Eigen::Index i = 0; i < r.rows.rows(); ++i) {
    CHECK(Predict(p, r.rows.row(i).cast<double>().transpose()) == NumberLabel::kSingular);
  }
  CHECK(Accuracy(p, r) == doctest::Approx(MajorityRate(r)));
}

TEST_CASE("flipping labels flips the direction") {
  const RepresentationSet r = NoisySet(400, 5, 4);
  RepresentationSet f = r;
  for (auto& l : f.labels) l = Flip(l);
  const ProbeParams a = TrainProbe(r, r);
  const ProbeParams b = TrainProbe(f, f);
  CHECK(a.converged);
  CHECK(a.theta.dot(b.theta) / (a.theta.norm() * b.theta.norm()) <= -0.99);
}

TEST_CASE("single-class training set is degenerate") {
  RepresentationSet r = SignSet(10, 2, 5);
  for (auto& l : r.labels) l = NumberLabel::kPlural;
  CHECK(KindOf([&] { TrainProbe(r, r); }) == ErrorKind::kDegenerate);
}

TEST_CASE("prior entropy") {
  using L = NumberLabel;
  const std::vector<L> balanced{L::kSingular, L::kPlural, L::kSingular, L::kPlural};
  CHECK(VEntropy(balanced) == doctest::Approx(0.6931).epsilon(1e-4));
  const std::vector<L> same(5, L::kSingular);
  CHECK(VEntropy(same) == 0.0);
  std::vector<L> nine(9, L::kSingular);
  nine.push_back(L::kPlural);
  CHECK(VEntropy(nine) == doctest::Approx(0.3251).epsilon(1e-4));
  CHECK(VEntropy(nine) == oracle::PriorEntropy(9, 10));
  CHECK(KindOf([] { VEntropy({}); }) == ErrorKind::kData);
}

TEST_CASE("conditional entropy limits") {
  const RepresentationSet r = SignSet(20, 3, 6);
  CHECK(VConditionalEntropy(Fixed(Eigen::VectorXd::Zero(3), 0.0), r) ==
        doctest::Approx(std::log(2.0)));
  Eigen::VectorXd sharp = Eigen::VectorXd::Zero(3);
  sharp(0) = 1e4;
  CHECK(VConditionalEntropy(Fixed(sharp, 0.0), r) < 1e-12);
  CHECK(KindOf([&] { VConditionalEntropy(Fixed(Eigen::VectorXd::Zero(2), 0.0), r); }) ==
        ErrorKind::kShape);
}

TEST_CASE("conditional entropy matches a grid search on a four-point set") {
  std::mt19937_64 rng(12);
  const oracle::ToySet t = oracle::NonSeparableSet(4, 1, rng);
  const RepresentationSet r = FromToy(t);
  const ProbeParams p = TrainProbe(r, r);
  const double grid = oracle::GridSearchLogLoss(t.x, t.y);
  CHECK(std::abs(VConditionalEntropy(p, r) - grid) <= 1e-3);
}

TEST_CASE("V-information of independent labels is near zero") {
  RepresentationSet train = NoisySet(1000, 8, 7);
  RepresentationSet dev = NoisySet(1000, 8, 8);
  std::mt19937_64 rng(9);
  std::shuffle(train.labels.begin(), train.labels.end(), rng);
  std::shuffle(dev.labels.begin(), dev.labels.end(), rng);
  const VInformation v = ComputeVInformation(TrainProbe(train, dev), dev);
  CHECK(v.i_v <= 0.02);
  CHECK(v.i_v >= 0.0);
  REQUIRE(v.u_v.has_value());
}

TEST_CASE("V-information of a clean signal and its uncertainty share") {
  const auto train = SignSet(300, 4, 10);
  const auto dev = SignSet(300, 4, 11);
  const ProbeParams p = TrainProbe(train, dev);
  const VInformation v = ComputeVInformation(p, dev);
  CHECK(v.h_v == doctest::Approx(std::log(2.0)));
  CHECK(v.i_v == doctest::Approx(v.h_v - v.h_v_cond));
  CHECK(*v.u_v > 0.95);
  CHECK(VUncertainty(p, dev) == doctest::Approx(*v.u_v));
  RepresentationSet one = dev;
  for (auto& l : one.labels) l = NumberLabel::kSingular;
  CHECK_FALSE(ComputeVInformation(p, one).u_v.has_value());
  CHECK(KindOf([&] { VUncertainty(p, one); }) == ErrorKind::kDegenerate);
}

TEST_CASE("cosine matrix") {
  Eigen::VectorXd a(3), b(3), c(3);
  a << 1, 2, 3;
  b << -1, -2, -3;
  c << 3, 0, -1;
  const std::vector<ProbeParams> ps{Fixed(a, 0.5), Fixed(b, -2), Fixed(c, 0)};
  const Eigen::MatrixXd m = CosineMatrix(ps);
  for (int i = 0; i < 3; ++i) CHECK(m(i, i) == 1.0);
  CHECK(m(0, 1) == doctest::Approx(-1.0));
  CHECK(m(0, 2) == doctest::Approx(0.0));
  CHECK(m.isApprox(m.transpose()));
  CHECK(m.cwiseAbs().maxCoeff() <= 1.0);
  const std::vector<ProbeParams> zero{Fixed(a, 0), Fixed(Eigen::VectorXd::Zero(3), 0)};
  CHECK(KindOf([&] { CosineMatrix(zero); }) == ErrorKind::kDegenerate);
  const std::vector<ProbeParams> mixed{Fixed(a, 0), Fixed(Eigen::VectorXd::Ones(2), 0)};
  CHECK(KindOf([&] { CosineMatrix(mixed); }) == ErrorKind::kShape);
}

TEST_CASE("cross evaluation on the probe's own set reproduces its dev accuracy") {
  RepresentationSet train = NoisySet(300, 4, 13);
  RepresentationSet dev = NoisySet(200, 4, 14);
  RepresentationSet other = NoisySet(200, 4, 15);
  other.category = Category::kVerb;
  for (auto& l : other.labels) l = Flip(l);
  const ProbeParams p = TrainProbe(train, dev);
  const CrossEvalResult r = CrossEvaluate({{{Category::kNoun, 0}, p}},
                                          {{{Category::kNoun, 0}, dev},
                                           {{Category::kVerb, 0}, other},
                                           {{Category::kVerb, 1}, other}});
  CHECK(r.Find(Category::kNoun, Category::kNoun, 0) == doctest::Approx(p.dev_accuracy));
  // Systematically flipped labels score below the majority rate.
  CHECK(*r.Find(Category::kNoun, Category::kVerb, 0) < 0.5);
  CHECK_FALSE(r.Find(Category::kNoun, Category::kVerb, 1).has_value());
}

TEST_CASE("probe JSON round trip") {
  TempDir dir("probe");
  ProbeParams p = TrainProbe(NoisySet(100, 3, 16), NoisySet(50, 3, 17));
  p.category = Category::kMaskedVerb;
  p.layer = 2;
  SaveProbe(p, dir.File("p.json"));
  const ProbeParams q = LoadProbe(dir.File("p.json"));
  CHECK(q.category == Category::kMaskedVerb);
  CHECK(q.layer == 2);
  CHECK(q.iterations == p.iterations);
  CHECK((q.theta - p.theta).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(q.bias == doctest::Approx(p.bias));
  CHECK(KindOf([] { ProbeFromJson("{\"category\": 3}"); }) == ErrorKind::kParse);
}
