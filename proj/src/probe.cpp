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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/core.h>

namespace fairemb {

namespace {

// Stabilized softmax of one row, in place.
void softmax_inplace(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  const double top = row.maxCoeff();
  row = (row.array() - top).exp();
  row /= row.sum();
}

Eigen::MatrixXd standardize(const Eigen::Ref<const Eigen::MatrixXd>& x,
                            const Eigen::RowVectorXd& mean,
                            const Eigen::RowVectorXd& scale) {
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

// logits = X W^T + b for params laid out [w_k, b_k] per class.
Eigen::MatrixXd class_logits(const Eigen::Ref<const Eigen::MatrixXd>& x,
                             int num_classes, const Eigen::VectorXd& params) {
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd logits(x.rows(), num_classes);
  for (int k = 0; k < num_classes; ++k) {
    const auto block = params.segment(k * (d + 1), d + 1);
    logits.col(k) = x * block.head(d);
    logits.col(k).array() += block(d);
  }
  return logits;
}

}  // namespace

double probe_objective(const Eigen::Ref<const Eigen::MatrixXd>& standardized,
                       std::span<const int> class_index, int num_classes,
                       double l2, const Eigen::VectorXd& params,
                       Eigen::VectorXd* gradient) {
  const Eigen::Index n = standardized.rows();
  const Eigen::Index d = standardized.cols();
  Eigen::MatrixXd p = class_logits(standardized, num_classes, params);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = p.row(i).maxCoeff();
    const double lse = top + std::log((p.row(i).array() - top).exp().sum());
    loss += lse - p(i, class_index[i]);
    p.row(i) = (p.row(i).array() - lse).exp();
  }
  loss /= static_cast<double>(n);
  double penalty = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    penalty += params.segment(k * (d + 1), d).squaredNorm();
  }
  if (gradient) {
    for (Eigen::Index i = 0; i < n; ++i) p(i, class_index[i]) -= 1.0;
    p /= static_cast<double>(n);
    gradient->resize(params.size());
    for (int k = 0; k < num_classes; ++k) {
      auto block = gradient->segment(k * (d + 1), d + 1);
      block.head(d) = standardized.transpose() * p.col(k) +
                      l2 * params.segment(k * (d + 1), d);
      block(d) = p.col(k).sum();
    }
  }
  return loss + 0.5 * l2 * penalty;
}

ProbeModel fit_probe(const Eigen::Ref<const Eigen::MatrixXd>& features,
                     std::span<const int> labels, const ProbeOptions& options,
                     std::uint64_t seed) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw std::invalid_argument("features and labels disagree in length");
  }
  if (!(options.l2 >= 0.0)) throw std::invalid_argument("l2 must be >= 0");
  const std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2) {
    throw std::invalid_argument("probe needs at least two classes");
  }

  ProbeModel model;
  model.classes.assign(present.begin(), present.end());
  model.l2 = options.l2;
  const int k_count = static_cast<int>(model.classes.size());
  std::vector<int> index(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    index[i] = static_cast<int>(
        std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
        model.classes.begin());
  }

  model.mean = features.colwise().mean();
  model.scale =
      ((features.rowwise() - model.mean).cwiseAbs2().colwise().mean()).cwiseSqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(model.scale(j) > 1e-12)) model.scale(j) = 1.0;
  }
  const Eigen::MatrixXd x = standardize(features, model.mean, model.scale);

  const Eigen::Index p = k_count * (d + 1);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(p);
  {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.01);
    for (int k = 0; k < k_count; ++k) {
      for (Eigen::Index j = 0; j < d; ++j) params(k * (d + 1) + j) = normal(rng);
    }
  }

  ProbeDiagnostics& diag = model.diagnostics;
  Eigen::VectorXd grad;
  double value = probe_objective(x, index, k_count, options.l2, params, &grad);
  Eigen::MatrixXd hessian(p, p);
  Eigen::RowVectorXd prob(k_count);
  Eigen::VectorXd xt(d + 1);
  for (diag.iterations = 0; diag.iterations < options.max_iter; ++diag.iterations) {
    if (grad.norm() <= options.tol) {
      diag.converged = true;
      break;
    }
    hessian.setZero();
    const Eigen::MatrixXd logits = class_logits(x, k_count, params);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob = logits.row(i);
      softmax_inplace(prob);
      xt.head(d) = x.row(i).transpose();
      xt(d) = 1.0;
      const Eigen::MatrixXd outer = xt * xt.transpose();
      for (int a = 0; a < k_count; ++a) {
        for (int b = a; b < k_count; ++b) {
          const double c = (a == b ? prob(a) : 0.0) - prob(a) * prob(b);
          hessian.block(a * (d + 1), b * (d + 1), d + 1, d + 1) += c * outer;
        }
      }
    }
    hessian /= static_cast<double>(n);
    for (int a = 0; a < k_count; ++a) {
      for (int b = a + 1; b < k_count; ++b) {
        hessian.block(b * (d + 1), a * (d + 1), d + 1, d + 1) =
            hessian.block(a * (d + 1), b * (d + 1), d + 1, d + 1).transpose();
      }
      for (Eigen::Index j = 0; j < d; ++j) hessian(a * (d + 1) + j, a * (d + 1) + j) += options.l2;
    }
    // The tiny ridge covers the shared-bias direction, along which the
    // objective is flat.
    hessian.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = hessian.ldlt().solve(-grad);
    const double slope = grad.dot(step);
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial_grad;
    for (int h = 0; h < 50; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = params + t * step;
      const double f = probe_objective(x, index, k_count, options.l2, trial, &trial_grad);
      if (f <= value + 1e-4 * t * slope ||
          (f <= value && trial_grad.norm() < grad.norm())) {
        params = trial;
        value = f;
        grad = trial_grad;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  diag.gradient_norm = grad.norm();
  diag.objective = value;
  diag.converged = diag.gradient_norm <= options.tol;

  model.weights.resize(k_count, d);
  model.bias.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    model.weights.row(k) = params.segment(k * (d + 1), d).transpose();
    model.bias(k) = params(k * (d + 1) + d);
  }
  return model;
}

Eigen::MatrixXd probe_scores(const ProbeModel& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (features.cols() != model.weights.cols()) {
    throw std::invalid_argument(
        fmt::format("probe expects {} features, got {}", model.weights.cols(),
                    features.cols()));
  }
  Eigen::MatrixXd scores =
      standardize(features, model.mean, model.scale) * model.weights.transpose();
  scores.rowwise() += model.bias.transpose();
  for (Eigen::Index i = 0; i < scores.rows(); ++i) softmax_inplace(scores.row(i));
  return scores;
}

}  // namespace fairemb
