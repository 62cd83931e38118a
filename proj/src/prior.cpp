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

#include "fairemb/prior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/SparseCholesky>
#include <fmt/core.h>

#include "fairemb/detail/math.hpp"
#include "fairemb/errors.hpp"

namespace fairemb {

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::kDensity:
      return "density";
    case PriorKind::kObliviousDegree:
      return "oblivious_degree";
    case PriorKind::kBiased:
      return "biased";
  }
  return "unknown";
}

PriorKind parse_prior_kind(const std::string& text) {
  if (text == "density") return PriorKind::kDensity;
  if (text == "oblivious" || text == "oblivious_degree") {
    return PriorKind::kObliviousDegree;
  }
  if (text == "biased") return PriorKind::kBiased;
  throw std::invalid_argument(fmt::format("unknown prior kind '{}'", text));
}

PriorLayout::PriorLayout(const AttributedGraph& graph, const PriorSpec& spec)
    : kind_(spec.kind), num_nodes_(graph.num_nodes()) {
  switch (kind_) {
    case PriorKind::kDensity:
      size_ = 1;
      return;
    case PriorKind::kObliviousDegree:
      block_ = 1;
      size_ = num_nodes_;
      return;
    case PriorKind::kBiased:
      break;
  }
  if (spec.attributes.empty()) {
    throw DataError("a biased prior needs at least one attribute");
  }
  std::size_t offset = 0;
  for (const auto& name : spec.attributes) {
    if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
      throw DataError(fmt::format("attribute '{}' listed twice", name));
    }
    auto k = graph.schema().find(name);
    if (!k) throw DataError(fmt::format("unknown attribute '{}'", name));
    const auto values = graph.attribute_values(*k);
    names_.push_back(name);
    offsets_.push_back(offset);
    cardinality_.push_back(graph.schema()[*k].values.size());
    values_.emplace_back(values.begin(), values.end());
    offset += cardinality_.back();
  }
  unattributed_ = spec.include_unattributed_degree_term;
  block_ = offset + (unattributed_ ? 1 : 0);
  size_ = block_ * num_nodes_;
}

PriorLayout::Slot PriorLayout::slot(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("multiplier index");
  switch (kind_) {
    case PriorKind::kDensity:
      return {};
    case PriorKind::kObliviousDegree:
      return {static_cast<NodeIndex>(index), -1, kMissing};
    case PriorKind::kBiased:
      break;
  }
  const auto node = static_cast<NodeIndex>(index / block_);
  const std::size_t r = index % block_;
  if (unattributed_ && r == block_ - 1) return {node, -1, kMissing};
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    if (r < offsets_[k] + cardinality_[k]) {
      return {node, static_cast<int>(k),
              static_cast<ValueIndex>(r - offsets_[k])};
    }
  }
  throw std::logic_error("unreachable multiplier slot");
}

std::optional<std::size_t> PriorLayout::index_of(const Slot& slot) const {
  switch (kind_) {
    case PriorKind::kDensity:
      if (slot.node == -1 && slot.attribute == -1) return 0;
      return std::nullopt;
    case PriorKind::kObliviousDegree:
      if (slot.node >= 0 && static_cast<std::size_t>(slot.node) < num_nodes_ &&
          slot.attribute == -1) {
        return static_cast<std::size_t>(slot.node);
      }
      return std::nullopt;
    case PriorKind::kBiased:
      break;
  }
  if (slot.node < 0 || static_cast<std::size_t>(slot.node) >= num_nodes_) {
    return std::nullopt;
  }
  const std::size_t base = static_cast<std::size_t>(slot.node) * block_;
  if (slot.attribute == -1) {
    if (!unattributed_) return std::nullopt;
    return base + block_ - 1;
  }
  const auto k = static_cast<std::size_t>(slot.attribute);
  if (k >= offsets_.size() || slot.value < 0 ||
      static_cast<std::size_t>(slot.value) >= cardinality_[k]) {
    return std::nullopt;
  }
  return base + offsets_[k] + static_cast<std::size_t>(slot.value);
}

PriorModel::PriorModel(PriorSpec spec, PriorLayout layout,
                       Eigen::VectorXd multipliers, std::vector<Pin> pins,
                       FitDiagnostics diagnostics)
    : spec_(std::move(spec)),
      layout_(std::move(layout)),
      multipliers_(std::move(multipliers)),
      pins_(std::move(pins)),
      diagnostics_(diagnostics) {
  if (static_cast<std::size_t>(multipliers_.size()) != layout_.size()) {
    throw std::invalid_argument("multiplier count does not match the layout");
  }
  if (pins_.empty()) pins_.assign(layout_.size(), 0);
  if (pins_.size() != layout_.size()) {
    throw std::invalid_argument("pin count does not match the layout");
  }
  if (!multipliers_.allFinite()) {
    throw NumericalError("prior multipliers must be finite");
  }
}

double PriorModel::logit(NodeIndex u, NodeIndex v) const {
  const auto n = static_cast<NodeIndex>(num_nodes());
  if (u < 0 || v < 0 || u >= n || v >= n) {
    throw std::out_of_range(
        fmt::format("node pair ({}, {}) outside the prior's {} nodes", u, v, n));
  }
  if (u == v) throw std::invalid_argument("prior of a self-pair is undefined");
  return logit_unchecked(u, v);
}

double PriorModel::prob(NodeIndex u, NodeIndex v) const {
  return detail::logistic(logit(u, v));
}

PriorDual::PriorDual(const AttributedGraph& graph, PriorLayout layout)
    : graph_(&graph), layout_(std::move(layout)) {
  if (layout_.num_nodes() != graph.num_nodes()) {
    throw std::invalid_argument("prior layout and graph disagree on nodes");
  }
  const auto p = static_cast<Eigen::Index>(layout_.size());
  empirical_ = Eigen::VectorXd::Zero(p);
  capacity_ = Eigen::VectorXd::Zero(p);
  for (const auto& e : graph.edges()) {
    layout_.for_each_feature(e.u, e.v,
                             [&](std::size_t i, double c) { empirical_(i) += c; });
  }
  graph.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
    layout_.for_each_feature(u, v,
                             [&](std::size_t i, double c) { capacity_(i) += c; });
  });
  pin_saturated();
}

bool PriorDual::pinned(NodeIndex u, NodeIndex v) const {
  bool out = false;
  layout_.for_each_feature(u, v, [&](std::size_t i, double) {
    out = out || pins_[i] != 0;
  });
  return out;
}

void PriorDual::pin_saturated() {
  // Coefficients are nonnegative, so a saturated constraint pins every pair
  // it selects to its observed value. Take pinned pairs out and repeat until
  // no further constraint saturates.
  const std::size_t p = layout_.size();
  pins_.assign(p, 0);
  Eigen::VectorXd free_capacity = capacity_;
  free_empirical_ = empirical_;
  for (Pin round = 1;; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < p; ++i) {
      if (pins_[i] != 0 || free_capacity(i) == 0.0) continue;
      if (free_empirical_(i) == 0.0) {
        pins_[i] = -round;
        changed = true;
      } else if (free_empirical_(i) == free_capacity(i)) {
        pins_[i] = round;
        changed = true;
      }
    }
    if (!changed) break;
    free_capacity.setZero();
    free_empirical_.setZero();
    for_each_free_pair([&](NodeIndex u, NodeIndex v) {
      const bool edge = graph_->has_edge(u, v);
      layout_.for_each_feature(u, v, [&](std::size_t i, double c) {
        free_capacity(i) += c;
        if (edge) free_empirical_(i) += c;
      });
    });
  }
}

double PriorDual::objective(const Eigen::VectorXd& theta) const {
  double sum = 0.0;
  for_each_free_pair([&](NodeIndex u, NodeIndex v) {
    sum += detail::softplus(layout_.logit(theta, u, v));
  });
  return sum - theta.dot(free_empirical_);
}

Eigen::VectorXd PriorDual::gradient(const Eigen::VectorXd& theta) const {
  return evaluate(theta).gradient;
}

PriorDual::Evaluation PriorDual::evaluate(const Eigen::VectorXd& theta) const {
  Evaluation out;
  out.gradient = -free_empirical_;
  out.hessian_diagonal = Eigen::VectorXd::Zero(theta.size());
  std::vector<std::pair<std::size_t, double>> features;
  double sum = 0.0;
  for_each_free_pair([&](NodeIndex u, NodeIndex v) {
    features.clear();
    double x = 0.0;
    layout_.for_each_feature(u, v, [&](std::size_t i, double c) {
      x += c * theta(i);
      for (auto& f : features) {
        if (f.first == i) {
          f.second += c;
          return;
        }
      }
      features.emplace_back(i, c);
    });
    const double p = detail::logistic(x);
    const double w = p * (1.0 - p);
    sum += detail::softplus(x);
    for (const auto& [i, c] : features) {
      out.gradient(i) += c * p;
      out.hessian_diagonal(i) += c * c * w;
    }
  });
  out.objective = sum - theta.dot(free_empirical_);
  return out;
}

Eigen::VectorXd PriorDual::hessian_times(
    const Eigen::VectorXd& theta, const Eigen::VectorXd& direction) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(theta.size());
  for_each_free_pair([&](NodeIndex u, NodeIndex v) {
    double x = 0.0;
    double fd = 0.0;
    layout_.for_each_feature(u, v, [&](std::size_t i, double c) {
      x += c * theta(i);
      fd += c * direction(i);
    });
    if (fd == 0.0) return;
    const double p = detail::logistic(x);
    const double s = p * (1.0 - p) * fd;
    layout_.for_each_feature(u, v,
                             [&](std::size_t i, double c) { out(i) += c * s; });
  });
  return out;
}

Eigen::SparseMatrix<double> PriorDual::hessian(
    const Eigen::VectorXd& theta, const std::vector<bool>& keep) const {
  std::vector<Eigen::Index> compact(keep.size(), -1);
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) compact[i] = n++;
  }
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<std::pair<std::size_t, double>> features;
  for_each_free_pair([&](NodeIndex u, NodeIndex v) {
    features.clear();
    double x = 0.0;
    layout_.for_each_feature(u, v, [&](std::size_t i, double c) {
      x += c * theta(i);
      if (compact[i] < 0) return;
      for (auto& f : features) {
        if (f.first == i) {
          f.second += c;
          return;
        }
      }
      features.emplace_back(i, c);
    });
    const double p = detail::logistic(x);
    const double w = p * (1.0 - p);
    if (w == 0.0) return;
    for (const auto& [i, ci] : features) {
      for (const auto& [j, cj] : features) {
        entries.emplace_back(compact[i], compact[j], w * ci * cj);
      }
    }
  });
  Eigen::SparseMatrix<double> h(n, n);
  h.setFromTriplets(entries.begin(), entries.end());
  return h;
}

namespace {

// Free sets up to this size get an exact sparse Newton solve; larger ones
// use preconditioned CG on Hessian-vector products.
constexpr std::size_t kDirectSolveLimit = 6000;

double initial_multiplier(const AttributedGraph& graph, const PriorSpec& spec) {
  const double pairs = static_cast<double>(graph.num_candidate_pairs());
  const double density =
      std::clamp(static_cast<double>(graph.num_edges()) / std::max(pairs, 1.0),
                 1e-12, 1.0 - 1e-12);
  const double x = detail::logit(density);
  switch (spec.kind) {
    case PriorKind::kDensity:
      return x;
    case PriorKind::kObliviousDegree:
      return x / 2.0;
    case PriorKind::kBiased:
      return x / (2.0 * static_cast<double>(spec.attributes.size()));
  }
  return 0.0;
}

struct Projection {
  // true for multipliers allowed to move this iteration.
  std::vector<bool> free;
  double max_free_gradient = 0.0;
};

Projection project(const PriorDual& dual, const Eigen::VectorXd& theta,
                   const Eigen::VectorXd& gradient) {
  Projection out;
  out.free.assign(theta.size(), false);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (dual.unused(i) || dual.saturated(i)) continue;
    const bool blocked_up = theta(i) >= kMultiplierClamp && gradient(i) < 0.0;
    const bool blocked_down =
        theta(i) <= -kMultiplierClamp && gradient(i) > 0.0;
    if (blocked_up || blocked_down) continue;
    out.free[i] = true;
    out.max_free_gradient = std::max(out.max_free_gradient, std::abs(gradient(i)));
  }
  return out;
}

Eigen::VectorXd masked(const Eigen::VectorXd& v, const std::vector<bool>& mask) {
  Eigen::VectorXd out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!mask[i]) out(i) = 0.0;
  }
  return out;
}

// Newton step on the free block of the quadratic model, with the other
// multipliers displaced by `shift`: a sparse LDLT solve for moderate free
// sets, preconditioned CG otherwise. Near a face of the feasible region the
// Hessian is too ill-conditioned for CG to make progress.
Eigen::VectorXd free_newton_step(const PriorDual& dual,
                                 const Eigen::VectorXd& theta,
                                 const PriorDual::Evaluation& eval,
                                 const std::vector<bool>& free,
                                 const Eigen::VectorXd& shift, double damping) {
  Eigen::VectorXd g = eval.gradient;
  if (!shift.isZero()) g += dual.hessian_times(theta, shift);
  g = masked(g, free);
  const double g_norm = g.norm();
  const double forcing = std::min(0.5, std::sqrt(g_norm));
  const double ridge = 1e-10 * (1.0 + eval.hessian_diagonal.maxCoeff()) + damping;
  Eigen::VectorXd precond(theta.size());
  std::size_t n_free = 0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    precond(i) = free[i] ? 1.0 / (std::max(eval.hessian_diagonal(i), 1e-12) + ridge)
                         : 0.0;
    n_free += free[i] ? 1 : 0;
  }
  if (n_free > 0 && n_free <= kDirectSolveLimit) {
    Eigen::SparseMatrix<double> h = dual.hessian(theta, free);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n_free));
    for (Eigen::Index i = 0, k = 0; i < theta.size(); ++i) {
      if (free[i]) rhs(k++) = -g(i);
    }
    for (Eigen::Index k = 0; k < h.rows(); ++k) h.coeffRef(k, k) += ridge;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(h);
    if (ldlt.info() == Eigen::Success) {
      const Eigen::VectorXd step = ldlt.solve(rhs);
      if (ldlt.info() == Eigen::Success && step.allFinite()) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(theta.size());
        for (Eigen::Index i = 0, k = 0; i < theta.size(); ++i) {
          if (free[i]) d(i) = step(k++);
        }
        return d;
      }
    }
  }

  Eigen::VectorXd d = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd r = -g;
  Eigen::VectorXd z = precond.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const std::size_t max_cg = std::min<std::size_t>(n_free, 250);
  for (std::size_t j = 0; j < max_cg; ++j) {
    Eigen::VectorXd hp = masked(dual.hessian_times(theta, p), free) + ridge * p;
    const double curvature = p.dot(hp);
    if (!(curvature > 0.0)) break;
    const double alpha = rz / curvature;
    d += alpha * p;
    r -= alpha * hp;
    if (r.norm() <= forcing * g_norm) break;
    z = precond.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return d;
}

// Multipliers whose Newton step would leave the box are moved to the bound
// and the step is solved again for the rest, until no free step crosses.
Eigen::VectorXd newton_direction(const PriorDual& dual,
                                 const Eigen::VectorXd& theta,
                                 const PriorDual::Evaluation& eval,
                                 std::vector<bool> free, double damping) {
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd step;
  for (int round = 0; round < 8; ++round) {
    step = free_newton_step(dual, theta, eval, free, shift, damping);
    bool crossed = false;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      if (!free[i] || std::abs(theta(i) + step(i)) <= kMultiplierClamp) continue;
      free[i] = false;
      shift(i) = std::copysign(kMultiplierClamp, theta(i) + step(i)) - theta(i);
      crossed = true;
    }
    if (!crossed) break;
  }
  return step + shift;
}

Eigen::VectorXd clamp_step(const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& direction, double t) {
  return (theta + t * direction)
      .cwiseMax(-kMultiplierClamp)
      .cwiseMin(kMultiplierClamp);
}

// Backtracking along the projected path. Updates theta / eval and returns
// the number of halvings when a step is accepted, -1 otherwise.
int line_search(const PriorDual& dual, const Eigen::VectorXd& direction,
                 Eigen::VectorXd& theta, PriorDual::Evaluation& eval,
                 double current_max_gradient) {
  double t = 1.0;
  for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
    Eigen::VectorXd candidate = clamp_step(theta, direction, t);
    const Eigen::VectorXd step = candidate - theta;
    if (step.lpNorm<Eigen::Infinity>() == 0.0) return -1;
    PriorDual::Evaluation next = dual.evaluate(candidate);
    if (!std::isfinite(next.objective)) continue;
    const bool armijo =
        next.objective <= eval.objective + 1e-4 * eval.gradient.dot(step);
    // Near the optimum the objective is flat to rounding; accept steps that
    // shrink the residuals without raising it measurably.
    bool flat_progress = false;
    if (!armijo &&
        next.objective <= eval.objective + 1e-13 * (1.0 + std::abs(eval.objective))) {
      flat_progress = project(dual, candidate, next.gradient).max_free_gradient <
                      current_max_gradient;
    }
    if (armijo || flat_progress) {
      theta = std::move(candidate);
      eval = std::move(next);
      return halving;
    }
  }
  return -1;
}

}  // namespace

PriorModel fit_prior(const AttributedGraph& graph, const PriorSpec& spec,
                     const FitOptions& options) {
  if (graph.num_nodes() < 2) throw DataError("prior needs at least two nodes");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  PriorLayout layout(graph, spec);
  PriorDual dual(graph, layout);

  const auto p = static_cast<Eigen::Index>(layout.size());
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(
      p, std::clamp(initial_multiplier(graph, spec), -kMultiplierClamp,
                    kMultiplierClamp));
  for (Eigen::Index i = 0; i < p; ++i) {
    if (dual.unused(i)) theta(i) = 0.0;
    if (dual.pins()[i] < 0) theta(i) = -kMultiplierClamp;
    if (dual.pins()[i] > 0) theta(i) = kMultiplierClamp;
  }

  FitDiagnostics diag;
  double damping = 0.0;
  PriorDual::Evaluation eval = dual.evaluate(theta);
  for (diag.iterations = 0; diag.iterations < options.max_iter;
       ++diag.iterations) {
    if (!std::isfinite(eval.objective)) {
      throw NumericalError("prior dual objective is not finite");
    }
    const Projection proj = project(dual, theta, eval.gradient);
    if (proj.max_free_gradient <= options.tol) {
      diag.converged = true;
      break;
    }
    Eigen::VectorXd direction =
        newton_direction(dual, theta, eval, proj.free, damping);
    // Levenberg-Marquardt style damping: grows when Newton steps need
    // backtracking, which happens along the nearly flat directions of a
    // face, and decays again after full steps.
    const int halvings =
        line_search(dual, direction, theta, eval, proj.max_free_gradient);
    if (halvings == 0) {
      damping = damping < 1e-9 ? 0.0 : 0.25 * damping;
    } else {
      damping = std::max(4.0 * damping, 1e-6);
    }
    if (halvings >= 0) continue;
    // Fallback: diagonally scaled steepest descent.
    Eigen::VectorXd gradient_step(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      gradient_step(i) =
          proj.free[i]
              ? -eval.gradient(i) / std::max(eval.hessian_diagonal(i), 1e-12)
              : 0.0;
    }
    if (line_search(dual, gradient_step, theta, eval, proj.max_free_gradient) < 0) {
      break;
    }
  }

  PriorModel model(spec, std::move(layout), std::move(theta), dual.pins(), diag);
  const ResidualReport report = constraint_residuals(model, graph);
  diag.max_residual = report.max;
  diag.max_unsaturated_residual = report.max_unsaturated;
  diag.saturated = static_cast<std::size_t>(
      std::count(report.saturated.begin(), report.saturated.end(), true));
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!dual.unused(i) && !dual.saturated(i) &&
        std::abs(model.multipliers()(i)) >= kMultiplierClamp) {
      ++diag.clamped;
    }
  }
  return PriorModel(model.spec(), model.layout(), model.multipliers(),
                    model.pins(), diag);
}

ResidualReport constraint_residuals(const PriorModel& model,
                                    const AttributedGraph& graph) {
  if (model.num_nodes() != graph.num_nodes()) {
    throw std::invalid_argument("prior and graph disagree on nodes");
  }
  // Direct recount from the model's read-out probabilities.
  const PriorLayout& layout = model.layout();
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(layout.size());
  Eigen::VectorXd empirical = Eigen::VectorXd::Zero(layout.size());
  std::vector<bool> used(layout.size(), false);
  graph.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
    const double p = detail::logistic(model.logit_unchecked(u, v));
    const bool edge = graph.has_edge(u, v);
    layout.for_each_feature(u, v, [&](std::size_t i, double c) {
      expected(i) += c * p;
      if (edge) empirical(i) += c;
      used[i] = true;
    });
  });
  ResidualReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (!used[i]) continue;
    const double r = std::abs(expected(i) - empirical(i));
    // A free multiplier held at the clamp is saturated jointly with other
    // constraints: without the box it would diverge.
    const bool saturated =
        model.pins()[i] != 0 ||
        std::abs(model.multipliers()(i)) >= kMultiplierClamp;
    report.slots.push_back(layout.slot(i));
    report.residuals.push_back(r);
    report.saturated.push_back(saturated);
    report.max = std::max(report.max, r);
    if (!saturated) report.max_unsaturated = std::max(report.max_unsaturated, r);
    sum += r;
  }
  if (!report.residuals.empty()) {
    report.mean = sum / static_cast<double>(report.residuals.size());
  }
  return report;
}

}  // namespace fairemb
