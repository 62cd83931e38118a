// Copyright 2026 The fairemb Authors
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


#include "fairemb/probe.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairemb/metrics.hpp"

namespace fairemb {
namespace {

struct Toy {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

Toy gaussian_blobs(int n, int classes, int dims, double shift,
                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Toy t{Eigen::MatrixXd(n, dims), std::vector<int>(n)};
  for (int i = 0; i < n; ++i) {
    t.y[i] = i % classes;
    for (int j = 0; j < dims; ++j) {
      t.x(i, j) = normal(rng) + (j == t.y[i] % dims ? shift : 0.0);
    }
  }
  return t;
}

TEST(ProbeTest, SeparableToyIsFitExactly) {
  Eigen::MatrixXd x(8, 2);
  x << 0, 0, 1, 0, 0, 1, 1, 1, 5, 5, 6, 5, 5, 6, 6, 6;
  const std::vector<int> y = {3, 3, 3, 3, 7, 7, 7, 7};
  const auto model = fit_probe(x, y, {0.01}, 1);
  EXPECT_EQ(model.classes, (std::vector<int>{3, 7}));
  const Eigen::MatrixXd p = probe_scores(model, x);
  for (int i = 0; i < 8; ++i) {
    Eigen::Index best;
    p.row(i).maxCoeff(&best);
    EXPECT_EQ(model.classes[best], y[i]);
  }
  EXPECT_TRUE(model.diagnostics.converged);
  EXPECT_LE(model.diagnostics.gradient_norm, 1e-6);
}

TEST(ProbeTest, ObjectiveGradientMatchesFiniteDifferences) {
  const Toy t = gaussian_blobs(40, 3, 4, 1.0, 2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 0.5);
  Eigen::VectorXd params(3 * 5);
  for (Eigen::Index i = 0; i < params.size(); ++i) params(i) = normal(rng);
  Eigen::VectorXd g;
  probe_objective(t.x, t.y, 3, 0.3, params, &g);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    Eigen::VectorXd up = params;
    Eigen::VectorXd down = params;
    up(i) += h;
    down(i) -= h;
    const double fd = (probe_objective(t.x, t.y, 3, 0.3, up) -
                       probe_objective(t.x, t.y, 3, 0.3, down)) /
                      (2.0 * h);
    EXPECT_NEAR(g(i), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(ProbeTest, OptimumDoesNotDependOnSeed) {
  const Toy t = gaussian_blobs(120, 4, 3, 0.8, 7);
  for (double l2 : {0.01, 1.0}) {
    const double first = fit_probe(t.x, t.y, {l2}, 0).diagnostics.objective;
    for (std::uint64_t seed = 1; seed < 5; ++seed) {
      const auto model = fit_probe(t.x, t.y, {l2}, seed);
      EXPECT_TRUE(model.diagnostics.converged);
      EXPECT_NEAR(model.diagnostics.objective, first, 1e-8);
    }
  }
}

TEST(ProbeTest, RowsAreDistributions) {
  const Toy t = gaussian_blobs(60, 3, 2, 2.0, 3);
  const auto model = fit_probe(t.x, t.y, {0.1}, 0);
  const Toy other = gaussian_blobs(30, 3, 2, 5.0, 4);
  const Eigen::MatrixXd p = probe_scores(model, other.x * 10.0);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE((p.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
}

TEST(ProbeTest, ZeroWeightsGiveUniformRows) {
  ProbeModel model;
  model.classes = {0, 1, 2, 3};
  model.mean = Eigen::RowVectorXd::Zero(2);
  model.scale = Eigen::RowVectorXd::Ones(2);
  model.weights = Eigen::MatrixXd::Zero(4, 2);
  model.bias = Eigen::VectorXd::Zero(4);
  const Eigen::MatrixXd p = probe_scores(model, Eigen::MatrixXd::Random(5, 2));
  EXPECT_LE((p.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(ProbeTest, ScoresMatchHandSoftmax) {
  ProbeModel model;
  model.classes = {0, 1};
  model.mean = Eigen::RowVectorXd::Constant(2, 1.0);
  model.scale = Eigen::RowVectorXd::Constant(2, 2.0);
  model.weights.resize(2, 2);
  model.weights << 1.0, -1.0, 0.5, 2.0;
  model.bias.resize(2);
  model.bias << 0.1, -0.3;
  Eigen::MatrixXd x(1, 2);
  x << 3.0, -1.0;  // standardized: (1, -1)
  const double a = std::exp(1.0 * 1 + -1.0 * -1 + 0.1);
  const double b = std::exp(0.5 * 1 + 2.0 * -1 - 0.3);
  const Eigen::MatrixXd p = probe_scores(model, x);
  EXPECT_NEAR(p(0, 0), a / (a + b), 1e-15);
  EXPECT_NEAR(p(0, 1), b / (a + b), 1e-15);
}

TEST(ProbeTest, Rejections) {
  const Toy t = gaussian_blobs(10, 1, 2, 0.0, 1);
  EXPECT_THROW(fit_probe(t.x, t.y, {1.0}, 0), std::invalid_argument);
  const Toy u = gaussian_blobs(10, 2, 2, 0.0, 1);
  const auto model = fit_probe(u.x, u.y, {1.0}, 0);
  EXPECT_THROW(probe_scores(model, Eigen::MatrixXd::Zero(3, 3)),
               std::invalid_argument);
  const std::vector<int> short_labels = {0, 1};
  EXPECT_THROW(fit_probe(u.x, short_labels, {1.0}, 0), std::invalid_argument);
}

TEST(ProbeTest, PermutedLabelsGiveChanceAuc) {
  double mean = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Toy t = gaussian_blobs(400, 2, 4, 2.0, static_cast<std::uint64_t>(s));
    std::mt19937_64 rng(static_cast<std::uint64_t>(s) + 1000);
    std::shuffle(t.y.begin(), t.y.end(), rng);
    const Eigen::MatrixXd train = t.x.topRows(320);
    const std::vector<int> train_y(t.y.begin(), t.y.begin() + 320);
    const auto model = fit_probe(train, train_y, {1.0}, 0);
    const Eigen::MatrixXd p = probe_scores(model, t.x.bottomRows(80));
    std::vector<double> score(80);
    std::vector<std::uint8_t> positive(80);
    for (int i = 0; i < 80; ++i) {
      score[i] = p(i, 1);
      positive[i] = t.y[320 + i] == 1;
    }
    mean += auc(score, positive) / seeds;
  }
  EXPECT_NEAR(mean, 0.5, 0.05);
}

}  // namespace
}  // namespace fairemb
