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

#ifndef FAIREMB_PRIOR_HPP_
#define FAIREMB_PRIOR_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fairemb/graph.hpp"

namespace fairemb {

enum class PriorKind { kDensity, kObliviousDegree, kBiased };

std::string to_string(PriorKind kind);
// Accepts "density", "oblivious" / "oblivious_degree", "biased".
PriorKind parse_prior_kind(const std::string& text);

struct PriorSpec {
  PriorKind kind = PriorKind::kObliviousDegree;
  // Attributes conditioned on by a biased prior.
  std::vector<std::string> attributes;
  // Biased priors only: one extra multiplier per node for partners lacking
  // a conditioned attribute.
  bool include_unattributed_degree_term = true;
};

// Bound on multiplier magnitudes. logistic(-30) ~ 1e-13.
inline constexpr double kMultiplierClamp = 30.0;
// Bound applied to pair logits when probabilities are read out, keeping
// them strictly inside (0, 1).
inline constexpr double kLogitLimit = 34.0;

// Position of each Lagrange multiplier and the selection rule that maps a
// node pair to the multipliers summed into its logit.
//
//   density           one global multiplier
//   oblivious_degree  one per node: x(u, v) = l_u + l_v
//   biased            one per (node, attribute, value), plus one per node
//                     for unattributed partners:
//                     x(u, v) = sum_k l[u, k, A_k(v)] + l[v, k, A_k(u)]
//                     with l[u, k, A_k(v)] replaced by the unattributed
//                     multiplier of u when v lacks attribute k.
class PriorLayout {
 public:
  struct Slot {
    NodeIndex node = -1;      // -1 for the global density multiplier
    int attribute = -1;       // index into attributes(); -1 for degree terms
    ValueIndex value = kMissing;
  };

  PriorLayout() = default;
  PriorLayout(const AttributedGraph& graph, const PriorSpec& spec);

  PriorKind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  std::size_t num_nodes() const { return num_nodes_; }
  // Schema names of the conditioned attributes.
  const std::vector<std::string>& attributes() const { return names_; }
  bool has_unattributed_term() const { return unattributed_; }

  Slot slot(std::size_t index) const;
  std::optional<std::size_t> index_of(const Slot& slot) const;

  // Calls f(index, coefficient) for every multiplier in the logit of (u, v).
  // A multiplier can be visited more than once. The visiting order depends
  // only on the unordered pair, so sums are exactly symmetric.
  template <typename F>
  void for_each_feature(NodeIndex u, NodeIndex v, F&& f) const {
    if (u > v) std::swap(u, v);
    switch (kind_) {
      case PriorKind::kDensity:
        f(std::size_t{0}, 1.0);
        return;
      case PriorKind::kObliviousDegree:
        f(static_cast<std::size_t>(u), 1.0);
        f(static_cast<std::size_t>(v), 1.0);
        return;
      case PriorKind::kBiased:
        for (std::size_t k = 0; k < values_.size(); ++k) {
          emit_biased(u, v, k, f);
          emit_biased(v, u, k, f);
        }
        return;
    }
  }

  template <typename Derived>
  double logit(const Eigen::MatrixBase<Derived>& theta, NodeIndex u,
               NodeIndex v) const {
    double x = 0.0;
    for_each_feature(u, v, [&](std::size_t i, double c) { x += c * theta(i); });
    return x;
  }

 private:
  template <typename F>
  void emit_biased(NodeIndex self, NodeIndex other, std::size_t k,
                   F& f) const {
    const ValueIndex s = values_[k][other];
    const std::size_t base = static_cast<std::size_t>(self) * block_;
    if (s != kMissing) {
      f(base + offsets_[k] + static_cast<std::size_t>(s), 1.0);
    } else if (unattributed_) {
      f(base + block_ - 1, 1.0);
    }
  }

  PriorKind kind_ = PriorKind::kDensity;
  std::size_t num_nodes_ = 0;
  std::size_t size_ = 0;
  std::size_t block_ = 0;
  bool unattributed_ = false;
  std::vector<std::string> names_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> cardinality_;
  std::vector<std::vector<ValueIndex>> values_;
};

struct FitOptions {
  double tol = 1e-6;
  int max_iter = 200;
};

struct FitDiagnostics {
  int iterations = 0;
  bool converged = false;
  // Largest |expected - empirical| over all active constraints.
  double max_residual = 0.0;
  // Same, restricted to constraints that are not saturated.
  double max_unsaturated_residual = 0.0;
  std::size_t saturated = 0;
  std::size_t clamped = 0;
};

// Saturation marker of one multiplier: 0 when free, +r when the constraint
// pins its pairs to 1 and -r when it pins them to 0, with r >= 1 the
// propagation round that saturated it. A pinned constraint only pins the
// pairs that were still free in round r.
using Pin = std::int32_t;

inline Pin pin_round(Pin pin) { return pin < 0 ? -pin : pin; }

// Independent-Bernoulli maximum-entropy edge model. Multipliers of saturated
// constraints sit at +-kMultiplierClamp and carry a pin; a pair selecting a
// pinned multiplier reads out at the logit limit given by its earliest pin.
class PriorModel {
 public:
  PriorModel() = default;
  PriorModel(PriorSpec spec, PriorLayout layout, Eigen::VectorXd multipliers,
             std::vector<Pin> pins = {}, FitDiagnostics diagnostics = {});

  const PriorSpec& spec() const { return spec_; }
  const PriorLayout& layout() const { return layout_; }
  const Eigen::VectorXd& multipliers() const { return multipliers_; }
  const std::vector<Pin>& pins() const { return pins_; }
  const FitDiagnostics& diagnostics() const { return diagnostics_; }
  std::size_t num_nodes() const { return layout_.num_nodes(); }

  // Pair logit clipped to [-kLogitLimit, kLogitLimit]. Throws
  // std::out_of_range for unknown nodes and std::invalid_argument for u == v.
  double logit(NodeIndex u, NodeIndex v) const;
  double prob(NodeIndex u, NodeIndex v) const;

  // Unchecked variant for hot loops.
  double logit_unchecked(NodeIndex u, NodeIndex v) const {
    double x = 0.0;
    Pin pin = 0;
    layout_.for_each_feature(u, v, [&](std::size_t i, double c) {
      x += c * multipliers_(i);
      const Pin p = pins_[i];
      if (p != 0 && (pin == 0 || pin_round(p) < pin_round(pin))) pin = p;
    });
    if (pin > 0) return kLogitLimit;
    if (pin < 0) return -kLogitLimit;
    return x > kLogitLimit ? kLogitLimit : (x < -kLogitLimit ? -kLogitLimit : x);
  }

 private:
  PriorSpec spec_;
  PriorLayout layout_;
  Eigen::VectorXd multipliers_;
  std::vector<Pin> pins_;
  FitDiagnostics diagnostics_;
};

// The convex dual of the maximum-entropy program restricted to the pairs
// not pinned by saturated constraints,
//   L(theta) = sum_{free pairs} softplus(x_uv) - theta . s_free,
// where s_free holds the empirical statistics over free pairs. Its gradient
// is expected minus empirical statistics.
//
// Keeps a pointer to `graph`, which must outlive the dual.
class PriorDual {
 public:
  PriorDual(const AttributedGraph& graph, PriorLayout layout);

  const PriorLayout& layout() const { return layout_; }
  // Statistics of the observed graph over all candidate pairs.
  const Eigen::VectorXd& empirical() const { return empirical_; }
  // Largest attainable value of each statistic.
  const Eigen::VectorXd& capacity() const { return capacity_; }
  // A multiplier that no candidate pair selects.
  bool unused(std::size_t i) const { return capacity_(i) == 0.0; }
  // The statistic can only be matched with an infinite multiplier: its
  // empirical value is 0 or its capacity once pairs already pinned by other
  // saturated constraints are taken out.
  bool saturated(std::size_t i) const { return pins_[i] != 0; }
  const std::vector<Pin>& pins() const { return pins_; }
  bool pinned(NodeIndex u, NodeIndex v) const;

  double objective(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;

  struct Evaluation {
    double objective = 0.0;
    Eigen::VectorXd gradient;
    Eigen::VectorXd hessian_diagonal;
  };
  Evaluation evaluate(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd hessian_times(const Eigen::VectorXd& theta,
                                const Eigen::VectorXd& direction) const;
  // Principal submatrix of the Hessian on the multipliers flagged in
  // `keep`, rows numbered in increasing multiplier order.
  Eigen::SparseMatrix<double> hessian(const Eigen::VectorXd& theta,
                                      const std::vector<bool>& keep) const;

 private:
  void pin_saturated();

  template <typename F>
  void for_each_free_pair(F&& f) const {
    graph_->for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
      if (!pinned(u, v)) f(u, v);
    });
  }

  const AttributedGraph* graph_;
  PriorLayout layout_;
  Eigen::VectorXd empirical_;
  Eigen::VectorXd capacity_;
  Eigen::VectorXd free_empirical_;
  std::vector<Pin> pins_;
};

// Damped projected Newton on the dual with conjugate-gradient directions,
// falling back to scaled gradient steps. Multipliers live in
// [-kMultiplierClamp, kMultiplierClamp]; saturated constraints end at the
// bound and their residuals are reported rather than driven to zero.
PriorModel fit_prior(const AttributedGraph& graph, const PriorSpec& spec,
                     const FitOptions& options = {});

inline double prior_prob(const PriorModel& model, NodeIndex u, NodeIndex v) {
  return model.prob(u, v);
}

struct ResidualReport {
  std::vector<PriorLayout::Slot> slots;
  std::vector<double> residuals;
  std::vector<bool> saturated;
  double max = 0.0;
  double mean = 0.0;
  double max_unsaturated = 0.0;
};

// |expected - empirical| for every constraint selected by at least one
// candidate pair of `graph`. Constraints that are pinned or whose multiplier
// sits at the clamp count as saturated.
ResidualReport constraint_residuals(const PriorModel& model,
                                    const AttributedGraph& graph);

}  // namespace fairemb

#endif  // FAIREMB_PRIOR_HPP_
