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


#include "fairemb/cne.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairemb/detail/math.hpp"
#include "fairemb/errors.hpp"
#include "fairemb/io.hpp"
#include "test_util.hpp"

namespace fairemb {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Normal density, written out independently of the logit form.
double normal_density(double x, double sigma) {
  return std::exp(-x * x / (2.0 * sigma * sigma)) /
         (sigma * std::sqrt(2.0 * kPi));
}

double naive_posterior(double pi, double delta, double s1, double s2) {
  const double a = pi * normal_density(delta, s1);
  const double b = (1.0 - pi) * normal_density(delta, s2);
  return a / (a + b);
}

EmbeddingModel random_model(const AttributedGraph& g, int d, double s1,
                            double s2, std::uint64_t seed) {
  EmbeddingModel emb;
  emb.nodes = g.ids();
  emb.z = initial_embedding(g.num_nodes(), d, seed);
  emb.sigma1 = s1;
  emb.sigma2 = s2;
  return emb;
}

// Distance between the two group centroids over the mean distance of nodes to
// their own centroid.
double separation(const EmbeddingModel& emb, const AttributedGraph& g) {
  const auto groups = g.attribute_values(0);
  Eigen::RowVectorXd c[2] = {Eigen::RowVectorXd::Zero(emb.z.cols()),
                             Eigen::RowVectorXd::Zero(emb.z.cols())};
  int count[2] = {0, 0};
  for (Eigen::Index u = 0; u < emb.z.rows(); ++u) {
    c[groups[u]] += emb.z.row(u);
    ++count[groups[u]];
  }
  c[0] /= count[0];
  c[1] /= count[1];
  double spread = 0.0;
  for (Eigen::Index u = 0; u < emb.z.rows(); ++u) {
    spread += (emb.z.row(u) - c[groups[u]]).norm();
  }
  spread /= static_cast<double>(emb.z.rows());
  return (c[0] - c[1]).norm() / spread;
}

AttributedGraph two_block_sbm(std::uint64_t seed) {
  SbmSpec spec;
  spec.nodes = 300;
  spec.p_in = 0.05;
  spec.p_out = 0.005;
  spec.seed = seed;
  return generate_sbm(spec);
}

TEST(PosteriorTest, WorkedValues) {
  // pi = 0.5: the density ratio at zero distance is sigma2 / sigma1 = 2.
  EXPECT_NEAR(detail::logistic(posterior_logit(0.0, 0.0, 0.7, 1.4)),
              2.0 / 3.0, 1e-12);
  // Reference computed at 40 digits.
  EXPECT_NEAR(detail::logistic(posterior_logit(0.0, 9.0, 0.7, 1.4)),
              0.002036248273914588991756768, 1e-15);
  EXPECT_NEAR(detail::logistic(posterior_logit(0.0, 1.0, 0.7, 1.4)),
              0.4819680880650560038956690, 1e-15);
}

TEST(PosteriorTest, MatchesDensityRatio) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double pi = 0.01 + 0.98 * unit(rng);
    const double delta = 4.0 * unit(rng);
    const double s1 = 0.3 + unit(rng);
    const double s2 = s1 + 2.0 * unit(rng);
    const double p = detail::logistic(
        posterior_logit(detail::logit(pi), delta * delta, s1, s2));
    EXPECT_NEAR(p, naive_posterior(pi, delta, s1, s2), 1e-12);
  }
}

TEST(PosteriorTest, ArrayForm) {
  Eigen::ArrayXd logits(3);
  logits << -1.0, 0.0, 2.0;
  Eigen::ArrayXd sq(3);
  sq << 0.5, 0.0, 4.0;
  const Eigen::ArrayXd x = posterior_logit(logits, sq, 0.7, 2.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(x(i), posterior_logit(logits(i), sq(i), 0.7, 2.0));
  }
}

TEST(PosteriorTest, StrictlyDecreasingInDistance) {
  for (double pi : {0.01, 0.3, 0.5, 0.9}) {
    double last = 2.0;
    for (double delta = 0.0; delta < 5.0; delta += 0.05) {
      const double p = detail::logistic(
          posterior_logit(detail::logit(pi), delta * delta, 0.7, 2.0));
      EXPECT_LT(p, last);
      EXPECT_GT(p, 0.0);
      EXPECT_LT(p, 1.0);
      last = p;
    }
  }
}

TEST(PosteriorTest, EqualSpreadsRecoverPrior) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto g = testing::random_graph({20, 0.3, {2}, 0.1, seed % 2 == 1}, seed);
    for (const PriorSpec& spec :
         {PriorSpec{PriorKind::kDensity}, PriorSpec{PriorKind::kObliviousDegree},
          PriorSpec{PriorKind::kBiased, {"a0"}}}) {
      const auto prior = fit_prior(g, spec);
      const auto emb = random_model(g, 3, 1.1, 1.1, seed);
      g.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
        EXPECT_LE(std::abs(posterior_prob(emb, prior, u, v) - prior.prob(u, v)),
                  1e-12);
      });
    }
  }
}

TEST(PosteriorTest, RejectsSelfPairAndBadSpreads) {
  auto g = testing::random_graph({6, 0.5, {}, 0.0, false}, 1);
  const auto prior = fit_prior(g, {PriorKind::kDensity});
  auto emb = random_model(g, 2, 0.7, 2.0, 1);
  EXPECT_THROW(posterior_prob(emb, prior, 1, 1), std::invalid_argument);
  EXPECT_THROW(check_spreads(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(check_spreads(2.0, 1.0), std::invalid_argument);
  EXPECT_NO_THROW(check_spreads(1.0, 1.0));
}

TEST(LogLikelihoodTest, MatchesNaiveDoubleLoop) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto g = testing::random_graph({8, 0.4, {2}, 0.0, seed % 3 == 2}, seed);
    const auto prior = fit_prior(g, {PriorKind::kObliviousDegree});
    const auto emb = random_model(g, 3, 0.7, 2.0, seed + 10);
    double expected = 0.0;
    for (NodeIndex u = 0; u < 8; ++u) {
      for (NodeIndex v = u + 1; v < 8; ++v) {
        if (!g.is_candidate(u, v)) continue;
        const double delta = (emb.z.row(u) - emb.z.row(v)).norm();
        const double p = naive_posterior(prior.prob(u, v), delta, 0.7, 2.0);
        expected += g.has_edge(u, v) ? std::log(p) : std::log(1.0 - p);
      }
    }
    EXPECT_NEAR(log_likelihood(emb, prior, g), expected, 1e-10);
  }
}

TEST(LogLikelihoodTest, EmptyGraphFarApartIsNearZero) {
  AttributedGraph g =
      build_graph(std::vector<RawEdge>{}, {}, {}, {{"a", "b", "c"}});
  PriorLayout layout(g, {PriorKind::kDensity});
  Eigen::VectorXd theta(1);
  theta << -20.0;
  PriorModel prior({PriorKind::kDensity}, layout, theta);
  EmbeddingModel emb;
  emb.nodes = g.ids();
  emb.z = Embedding::Zero(3, 2);
  emb.z(1, 0) = 3.0;
  emb.z(2, 1) = 3.0;
  const double value = log_likelihood(emb, prior, g);
  EXPECT_LT(value, 0.0);
  EXPECT_GT(value, -1e-6);
}

TEST(LogLikelihoodTest, EqualSpreadsGivePriorLikelihood) {
  auto g = testing::random_graph({12, 0.3, {2}, 0.0, false}, 4);
  const auto prior = fit_prior(g, {PriorKind::kBiased, {"a0"}});
  double bernoulli = 0.0;
  g.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
    const double p = prior.prob(u, v);
    bernoulli += g.has_edge(u, v) ? std::log(p) : std::log1p(-p);
  });
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto emb = random_model(g, 4, 0.9, 0.9, seed);
    EXPECT_NEAR(log_likelihood(emb, prior, g), bernoulli, 1e-9);
    EXPECT_EQ(gradient(emb, prior, g).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(GradientTest, CoincidentPairHasNoGradient) {
  const std::vector<RawEdge> edges = {{"a", "b"}};
  AttributedGraph g = build_graph(edges, {}, {}, {});
  const auto prior = fit_prior(g, {PriorKind::kDensity});
  EmbeddingModel emb;
  emb.nodes = g.ids();
  emb.z = Embedding::Constant(2, 3, 0.25);
  EXPECT_EQ(gradient(emb, prior, g).cwiseAbs().maxCoeff(), 0.0);
}

// Central differences with h = 1e-5 on 24 random instances. Instances where
// the prior pins every pair have a zero gradient and are drawn again.
TEST(GradientTest, MatchesFiniteDifferences) {
  const double h = 1e-5;
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 24 && seed < 200; ++seed) {
    const int n = 4 + static_cast<int>(seed % 7);
    const int d = 1 + static_cast<int>(seed % 4);
    auto g = testing::random_graph({n, 0.4, {2}, 0.2, seed % 4 == 3}, seed);
    const PriorSpec spec = seed % 3 == 0   ? PriorSpec{PriorKind::kDensity}
                           : seed % 3 == 1 ? PriorSpec{PriorKind::kObliviousDegree}
                                           : PriorSpec{PriorKind::kBiased, {"a0"}};
    const auto prior = fit_prior(g, spec);
    auto emb = random_model(g, d, 0.5 + 0.05 * static_cast<double>(seed % 5),
                            1.5 + 0.1 * static_cast<double>(seed % 3), seed + 100);
    const Embedding analytic = gradient(emb, prior, g);
    if (analytic.norm() < 1e-6) continue;
    Embedding numeric(analytic.rows(), analytic.cols());
    for (Eigen::Index i = 0; i < emb.z.size(); ++i) {
      const double keep = emb.z.data()[i];
      emb.z.data()[i] = keep + h;
      const double up = log_likelihood(emb, prior, g);
      emb.z.data()[i] = keep - h;
      const double down = log_likelihood(emb, prior, g);
      emb.z.data()[i] = keep;
      numeric.data()[i] = (up - down) / (2.0 * h);
    }
    EXPECT_LE((analytic - numeric).norm() / numeric.norm(), 1e-4)
        << "seed " << seed;
    ++checked;
  }
  EXPECT_EQ(checked, 24);
}

TEST(ObjectiveTest, BudgetAboveTotalKeepsEveryPair) {
  auto g = testing::random_graph({30, 0.2, {}, 0.0, false}, 9);
  const auto prior = fit_prior(g, {PriorKind::kObliviousDegree});
  EmbeddingObjective full(g, prior, 0.7, 2.0);
  EmbeddingObjective budget(g, prior, 0.7, 2.0, 10000, 1);
  EXPECT_FALSE(budget.subsampled());
  const Embedding z = initial_embedding(30, 4, 2);
  EXPECT_EQ(full.value(z), budget.value(z));
}

TEST(ObjectiveTest, SubsampleKeepsEdgesAndIsNearlyUnbiased) {
  auto g = testing::random_graph({120, 0.05, {}, 0.0, false}, 5);
  const auto prior = fit_prior(g, {PriorKind::kObliviousDegree});
  const Embedding z = initial_embedding(120, 4, 2);
  EmbeddingObjective full(g, prior, 0.7, 2.0);
  double mean = 0.0;
  const int runs = 20;
  for (int s = 0; s < runs; ++s) {
    EmbeddingObjective sub(g, prior, 0.7, 2.0, 3000, static_cast<std::uint64_t>(s));
    EXPECT_TRUE(sub.subsampled());
    EXPECT_EQ(sub.num_pairs(), 3000u);
    mean += sub.value(z) / runs;
  }
  EXPECT_NEAR(mean / full.value(z), 1.0, 0.02);
}

TEST(TrainTest, AscendsAndIsDeterministic) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    auto g = testing::random_graph({40, 0.15, {2}, 0.0, seed % 2 == 1}, seed);
    const auto prior = fit_prior(g, {PriorKind::kObliviousDegree});
    TrainConfig cfg;
    cfg.dims = 4;
    cfg.seed = seed;
    cfg.max_epochs = 100;
    const auto a = train(g, prior, cfg);
    const auto b = train(g, prior, cfg);
    EXPECT_GE(a.diagnostics.final_objective, a.diagnostics.initial_objective);
    EXPECT_EQ(a.diagnostics.final_objective, log_likelihood(a, prior, g));
    EXPECT_TRUE(a.z == b.z);
    EXPECT_TRUE(a.z.allFinite());
    EXPECT_EQ(a.nodes, g.ids());
  }
}

TEST(TrainTest, EqualSpreadsLeaveInitialization) {
  auto g = testing::random_graph({25, 0.2, {}, 0.0, false}, 2);
  const auto prior = fit_prior(g, {PriorKind::kObliviousDegree});
  TrainConfig cfg;
  cfg.dims = 3;
  cfg.sigma1 = cfg.sigma2 = 1.0;
  cfg.seed = 8;
  const auto emb = train(g, prior, cfg);
  EXPECT_TRUE(emb.z == initial_embedding(25, 3, 8));
}

TEST(TrainTest, InitializationScale) {
  const Embedding z = initial_embedding(4000, 8, 1);
  const double var = z.cwiseAbs2().mean() - std::pow(z.mean(), 2);
  EXPECT_NEAR(var, 1.0 / 8.0, 0.005);
}

TEST(TrainTest, BlocksSeparateUnlessThePriorExplainsThem) {
  double cne = 0.0;
  double deb = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto g = two_block_sbm(seed);
    TrainConfig cfg;
    cfg.seed = seed;
    const auto oblivious = fit_prior(g, {PriorKind::kObliviousDegree});
    const auto biased = fit_prior(g, {PriorKind::kBiased, {"group"}});
    cne += separation(train(g, oblivious, cfg), g) / 3.0;
    deb += separation(train(g, biased, cfg), g) / 3.0;
  }
  EXPECT_GT(cne, 1.0);
  EXPECT_LT(deb, 0.5 * cne);
}

TEST(PredictTest, SharedPathAndPairOrder) {
  auto g = testing::random_graph({30, 0.2, {2}, 0.0, false}, 6);
  const auto oblivious = fit_prior(g, {PriorKind::kObliviousDegree});
  const auto biased = fit_prior(g, {PriorKind::kBiased, {"a0"}});
  TrainConfig cfg;
  cfg.dims = 4;
  cfg.max_epochs = 50;
  const auto emb = train(g, biased, cfg);
  ScoredPairs pairs;
  g.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
    pairs.push_back({v, u, 0.0, g.has_edge(u, v)});
  });
  const auto scored = predict_links(emb, oblivious, pairs);
  ASSERT_EQ(scored.size(), pairs.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    EXPECT_LT(scored[i].u, scored[i].v);
    EXPECT_EQ(scored[i].label, pairs[i].label);
    EXPECT_EQ(scored[i].score, posterior_prob(emb, oblivious, scored[i].u, scored[i].v));
  }
  ScoredPairs reversed(pairs.rbegin(), pairs.rend());
  const auto again = predict_links(emb, oblivious, reversed);
  for (std::size_t i = 0; i < scored.size(); ++i) {
    EXPECT_EQ(again[scored.size() - 1 - i], scored[i]);
  }
  // Swapping the evaluation prior changes the scores.
  const auto under_biased = predict_links(emb, biased, pairs);
  EXPECT_NE(under_biased[0].score, scored[0].score);
}

TEST(PredictTest, RejectsUnknownNodes) {
  auto g = testing::random_graph({6, 0.5, {}, 0.0, false}, 1);
  const auto prior = fit_prior(g, {PriorKind::kDensity});
  const auto emb = random_model(g, 2, 0.7, 2.0, 1);
  const ScoredPairs bad = {{0, 6, 0.0, {}}};
  EXPECT_THROW(predict_links(emb, prior, bad), DataError);
  const ScoredPairs self = {{2, 2, 0.0, {}}};
  EXPECT_THROW(predict_links(emb, prior, self), DataError);
}

}  // namespace
}  // namespace fairemb
