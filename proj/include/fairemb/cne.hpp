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


#ifndef FAIREMB_CNE_HPP_
#define FAIREMB_CNE_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairemb/graph.hpp"
#include "fairemb/prior.hpp"
#include "fairemb/scored_pairs.hpp"

namespace fairemb {

// One row per node.
using Embedding =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TrainDiagnostics {
  int epochs = 0;
  int rejected_steps = 0;
  bool converged = false;
  double initial_objective = 0.0;
  double final_objective = 0.0;
};

// Spreads: distances between connected nodes are modelled as N(0, sigma1^2),
// between disconnected ones as N(0, sigma2^2). sigma1 == sigma2 is accepted
// and makes the embedding irrelevant.
struct EmbeddingModel {
  std::vector<std::string> nodes;
  Embedding z;
  double sigma1 = 0.7;
  double sigma2 = 2.0;
  TrainDiagnostics diagnostics;

  std::size_t dims() const { return static_cast<std::size_t>(z.cols()); }
};

struct TrainConfig {
  int dims = 8;
  double sigma1 = 0.7;
  double sigma2 = 2.0;
  // Adam step size; halved whenever a step lowers the objective.
  double learning_rate = 0.1;
  double backoff = 0.5;
  int max_epochs = 500;
  // Stop once an accepted step changes the objective by less than
  // tol * max(1, |objective|).
  double tol = 1e-6;
  std::uint64_t seed = 0;
  // Above this many candidate pairs, non-edges are subsampled uniformly
  // (fixed per run) and reweighted.
  std::optional<std::size_t> pair_budget;
};

// Throws std::invalid_argument unless 0 < sigma1 <= sigma2.
void check_spreads(double sigma1, double sigma2);

// Posterior logit of an edge given the prior logit and the squared embedding
// distance:
//   logit P = logit pi + log(sigma2 / sigma1)
//             - (1/sigma1^2 - 1/sigma2^2) * d^2 / 2.
// Works elementwise on Eigen arrays.
template <typename T>
T posterior_logit(const T& prior_logit, const T& sq_distance, double sigma1,
                  double sigma2) {
  const double beta = 1.0 / (sigma1 * sigma1) - 1.0 / (sigma2 * sigma2);
  return prior_logit + std::log(sigma2 / sigma1) - (0.5 * beta) * sq_distance;
}

double posterior_prob(const EmbeddingModel& emb, const PriorModel& prior,
                      NodeIndex u, NodeIndex v);

// The training log-likelihood sum_{pairs} a log P + (1 - a) log(1 - P) over
// the candidate pairs of a graph, with its gradient in Z. Pair-level prior
// logits are cached at construction.
class EmbeddingObjective {
 public:
  EmbeddingObjective(const AttributedGraph& graph, const PriorModel& prior,
                     double sigma1, double sigma2,
                     std::optional<std::size_t> pair_budget = {},
                     std::uint64_t seed = 0);

  std::size_t num_pairs() const { return pairs_.size(); }
  bool subsampled() const { return subsampled_; }

  double value(const Embedding& z) const;
  // Writes dL/dZ into `gradient` (resized as needed) and returns L.
  double evaluate(const Embedding& z, Embedding& gradient) const;

 private:
  struct Pair {
    NodeIndex u;
    NodeIndex v;
    double prior_logit;
  };

  template <bool kGradient>
  double accumulate(const Embedding& z, Embedding* gradient) const;

  std::vector<Pair> pairs_;
  std::vector<std::uint8_t> labels_;
  // Importance weight of the subsampled non-edges; 1 otherwise.
  double negative_weight_ = 1.0;
  bool subsampled_ = false;
  double offset_ = 0.0;
  double beta_ = 0.0;
};

double log_likelihood(const EmbeddingModel& emb, const PriorModel& prior,
                      const AttributedGraph& graph);
Embedding gradient(const EmbeddingModel& emb, const PriorModel& prior,
                   const AttributedGraph& graph);

// Seeded N(0, 1/dims) rows.
Embedding initial_embedding(std::size_t nodes, int dims, std::uint64_t seed);

// Adam ascent on the log-likelihood from initial_embedding(). Steps that lower
// the objective are rejected and the step size is backed off. Throws
// NumericalError when the objective stops being finite.
EmbeddingModel train(const AttributedGraph& graph, const PriorModel& train_prior,
                     const TrainConfig& cfg);

// Scores every pair under `eval_prior`, which may differ from the prior used
// for training. Output keeps the input order with pairs canonicalized. Throws
// DataError naming the first pair with an unknown endpoint.
ScoredPairs predict_links(const EmbeddingModel& emb,
                          const PriorModel& eval_prior,
                          std::span<const ScoredPair> pairs);

}  // namespace fairemb

#endif  // FAIREMB_CNE_HPP_
