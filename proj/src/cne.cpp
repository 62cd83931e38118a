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
#include <stdexcept>
#include <unordered_set>

#include <fmt/core.h>

#include "fairemb/detail/math.hpp"
#include "fairemb/errors.hpp"

namespace fairemb {

namespace {

// Adam constants.
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-8;
// Step sizes below this end training.
constexpr double kMinLearningRate = 1e-10;

void check_nodes(const EmbeddingModel& emb, const PriorModel& prior) {
  if (static_cast<std::size_t>(emb.z.rows()) != prior.num_nodes()) {
    throw std::invalid_argument(
        fmt::format("embedding has {} rows but the prior covers {} nodes",
                    emb.z.rows(), prior.num_nodes()));
  }
}

// The single scoring path shared by every caller.
double score_pair(const EmbeddingModel& emb, const PriorModel& prior,
                  NodeIndex u, NodeIndex v) {
  const double sq = (emb.z.row(u) - emb.z.row(v)).squaredNorm();
  return detail::logistic(posterior_logit(prior.logit_unchecked(u, v), sq,
                                          emb.sigma1, emb.sigma2));
}

}  // namespace

ScoredPairs labelled_pairs(const std::vector<Edge>& positives,
                           const std::vector<Edge>& negatives) {
  ScoredPairs out;
  out.reserve(positives.size() + negatives.size());
  for (const Edge& e : positives) out.push_back({e.u, e.v, 0.0, true});
  for (const Edge& e : negatives) out.push_back({e.u, e.v, 0.0, false});
  return out;
}

void check_spreads(double sigma1, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 >= sigma1) || !std::isfinite(sigma2)) {
    throw std::invalid_argument(fmt::format(
        "spreads must satisfy 0 < sigma1 <= sigma2, got {} and {}", sigma1,
        sigma2));
  }
}

double posterior_prob(const EmbeddingModel& emb, const PriorModel& prior,
                      NodeIndex u, NodeIndex v) {
  check_nodes(emb, prior);
  prior.logit(u, v);  // validates the pair
  return score_pair(emb, prior, u, v);
}

EmbeddingObjective::EmbeddingObjective(const AttributedGraph& graph,
                                       const PriorModel& prior, double sigma1,
                                       double sigma2,
                                       std::optional<std::size_t> pair_budget,
                                       std::uint64_t seed) {
  check_spreads(sigma1, sigma2);
  if (prior.num_nodes() != graph.num_nodes()) {
    throw std::invalid_argument("prior and graph disagree on nodes");
  }
  beta_ = 1.0 / (sigma1 * sigma1) - 1.0 / (sigma2 * sigma2);
  offset_ = std::log(sigma2 / sigma1);

  const std::size_t total = graph.num_candidate_pairs();
  if (pair_budget && *pair_budget == 0) {
    throw std::invalid_argument("pair budget must be positive");
  }
  if (!pair_budget || total <= *pair_budget) {
    pairs_.reserve(total);
    labels_.reserve(total);
    graph.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
      pairs_.push_back({u, v, prior.logit_unchecked(u, v)});
      labels_.push_back(graph.has_edge(u, v) ? 1 : 0);
    });
    return;
  }

  // All edges plus a fixed uniform sample of non-edges.
  subsampled_ = true;
  const std::size_t m = graph.num_edges();
  const std::size_t non_edges = total - m;
  const std::size_t wanted = std::min(
      non_edges, *pair_budget > m ? *pair_budget - m : std::max<std::size_t>(m, 1));
  std::vector<Edge> sampled;
  sampled.reserve(wanted);
  std::unordered_set<std::uint64_t> seen;
  std::mt19937_64 rng(seed);
  const auto n = static_cast<NodeIndex>(graph.num_nodes());
  while (sampled.size() < wanted) {
    NodeIndex a;
    NodeIndex b;
    if (graph.is_bipartite()) {
      const auto& left = graph.part_members(0);
      const auto& right = graph.part_members(1);
      a = left[std::uniform_int_distribution<std::size_t>(0, left.size() - 1)(rng)];
      b = right[std::uniform_int_distribution<std::size_t>(0, right.size() - 1)(rng)];
    } else {
      std::uniform_int_distribution<NodeIndex> pick(0, n - 1);
      a = pick(rng);
      b = pick(rng);
    }
    if (!graph.is_candidate(a, b) || graph.has_edge(a, b)) continue;
    const Edge e = make_edge(a, b);
    const std::uint64_t key =
        (static_cast<std::uint64_t>(e.u) << 32) | static_cast<std::uint32_t>(e.v);
    if (seen.insert(key).second) sampled.push_back(e);
  }
  std::vector<Edge> all(graph.edges().begin(), graph.edges().end());
  all.insert(all.end(), sampled.begin(), sampled.end());
  std::sort(all.begin(), all.end());
  pairs_.reserve(all.size());
  labels_.reserve(all.size());
  for (const Edge& e : all) {
    pairs_.push_back({e.u, e.v, prior.logit_unchecked(e.u, e.v)});
    labels_.push_back(graph.has_edge(e.u, e.v) ? 1 : 0);
  }
  negative_weight_ =
      static_cast<double>(non_edges) / static_cast<double>(wanted);
}

template <bool kGradient>
double EmbeddingObjective::accumulate(const Embedding& z,
                                      Embedding* gradient) const {
  const Eigen::Index d = z.cols();
  const double half_beta = 0.5 * beta_;
  if constexpr (kGradient) gradient->setZero(z.rows(), d);
  Eigen::VectorXd diff(d);
  double total = 0.0;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const Pair& p = pairs_[i];
    const double* zu = z.data() + static_cast<Eigen::Index>(p.u) * d;
    const double* zv = z.data() + static_cast<Eigen::Index>(p.v) * d;
    double sq = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      diff(j) = zu[j] - zv[j];
      sq += diff(j) * diff(j);
    }
    const double x = p.prior_logit + offset_ - half_beta * sq;
    const double a = labels_[i];
    const double w = labels_[i] ? 1.0 : negative_weight_;
    // softplus and logistic share exp(-|x|).
    const double e = std::exp(-std::abs(x));
    total += w * (a * x - (std::max(x, 0.0) + std::log1p(e)));
    if constexpr (kGradient) {
      const double prob = x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
      const double coef = w * beta_ * (prob - a);
      double* gu = gradient->data() + static_cast<Eigen::Index>(p.u) * d;
      double* gv = gradient->data() + static_cast<Eigen::Index>(p.v) * d;
      for (Eigen::Index j = 0; j < d; ++j) {
        gu[j] += coef * diff(j);
        gv[j] -= coef * diff(j);
      }
    }
  }
  return total;
}

double EmbeddingObjective::value(const Embedding& z) const {
  return accumulate<false>(z, nullptr);
}

double EmbeddingObjective::evaluate(const Embedding& z,
                                    Embedding& gradient) const {
  return accumulate<true>(z, &gradient);
}

double log_likelihood(const EmbeddingModel& emb, const PriorModel& prior,
                      const AttributedGraph& graph) {
  check_nodes(emb, prior);
  return EmbeddingObjective(graph, prior, emb.sigma1, emb.sigma2).value(emb.z);
}

Embedding gradient(const EmbeddingModel& emb, const PriorModel& prior,
                   const AttributedGraph& graph) {
  check_nodes(emb, prior);
  Embedding g;
  EmbeddingObjective(graph, prior, emb.sigma1, emb.sigma2).evaluate(emb.z, g);
  return g;
}

Embedding initial_embedding(std::size_t nodes, int dims, std::uint64_t seed) {
  if (dims < 1) throw std::invalid_argument("embedding dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(dims));
  Embedding z(static_cast<Eigen::Index>(nodes), dims);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
  return z;
}

EmbeddingModel train(const AttributedGraph& graph, const PriorModel& train_prior,
                     const TrainConfig& cfg) {
  if (cfg.max_epochs < 0 || !(cfg.learning_rate > 0.0) ||
      !(cfg.backoff > 0.0 && cfg.backoff < 1.0) || !(cfg.tol >= 0.0)) {
    throw std::invalid_argument("invalid training configuration");
  }
  const EmbeddingObjective objective(graph, train_prior, cfg.sigma1, cfg.sigma2,
                                     cfg.pair_budget, cfg.seed);
  EmbeddingModel model;
  model.nodes = graph.ids();
  model.sigma1 = cfg.sigma1;
  model.sigma2 = cfg.sigma2;
  model.z = initial_embedding(graph.num_nodes(), cfg.dims, cfg.seed);

  TrainDiagnostics& diag = model.diagnostics;
  Embedding grad;
  double value = objective.evaluate(model.z, grad);
  if (!std::isfinite(value)) {
    throw NumericalError("embedding objective is not finite at initialization");
  }
  diag.initial_objective = value;

  Embedding m = Embedding::Zero(model.z.rows(), model.z.cols());
  Embedding v = m;
  Embedding m_next;
  Embedding v_next;
  Embedding candidate;
  Embedding candidate_grad;
  double lr = cfg.learning_rate;
  int t = 0;
  while (diag.epochs < cfg.max_epochs) {
    ++diag.epochs;
    const int step = t + 1;
    m_next = kBeta1 * m + (1.0 - kBeta1) * grad;
    v_next = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kBeta1, step);
    const double c2 = 1.0 - std::pow(kBeta2, step);
    candidate = model.z.array() +
                lr * (m_next.array() / c1) /
                    ((v_next.array() / c2).sqrt() + kEpsilon);
    const double next = objective.evaluate(candidate, candidate_grad);
    if (!std::isfinite(next)) {
      throw NumericalError(fmt::format(
          "embedding objective diverged at epoch {} (last finite value {}, "
          "step size {})",
          diag.epochs, value, lr));
    }
    if (next < value) {
      ++diag.rejected_steps;
      lr *= cfg.backoff;
      if (lr < kMinLearningRate) break;
      continue;
    }
    const double change = next - value;
    model.z.swap(candidate);
    grad.swap(candidate_grad);
    m.swap(m_next);
    v.swap(v_next);
    t = step;
    value = next;
    if (change <= cfg.tol * std::max(1.0, std::abs(value))) {
      diag.converged = true;
      break;
    }
  }
  diag.final_objective = value;
  return model;
}

ScoredPairs predict_links(const EmbeddingModel& emb,
                          const PriorModel& eval_prior,
                          std::span<const ScoredPair> pairs) {
  check_nodes(emb, eval_prior);
  const auto n = static_cast<NodeIndex>(emb.z.rows());
  ScoredPairs out;
  out.reserve(pairs.size());
  for (const ScoredPair& p : pairs) {
    if (p.u < 0 || p.v < 0 || p.u >= n || p.v >= n || p.u == p.v) {
      throw DataError(fmt::format("cannot score pair ({}, {}) over {} nodes",
                                  p.u, p.v, n));
    }
    const Edge e = make_edge(p.u, p.v);
    out.push_back({e.u, e.v, score_pair(emb, eval_prior, e.u, e.v), p.label});
  }
  return out;
}

}  // namespace fairemb
