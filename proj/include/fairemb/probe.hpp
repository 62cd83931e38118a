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


#ifndef FAIREMB_PROBE_HPP_
#define FAIREMB_PROBE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fairemb {

struct ProbeDiagnostics {
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
  bool converged = false;
};

// Multinomial logistic regression on standardized features. Row k of
// `weights` and entry k of `bias` score classes[k].
struct ProbeModel {
  std::vector<int> classes;
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;
  Eigen::MatrixXd weights;  // classes x dims
  Eigen::VectorXd bias;
  double l2 = 1.0;
  ProbeDiagnostics diagnostics;
};

struct ProbeOptions {
  double l2 = 1.0;
  double tol = 1e-6;
  int max_iter = 100;
};

// Minimizes mean cross-entropy + (l2 / 2) * ||weights||^2 by damped Newton,
// starting from small seeded weights. Labels are arbitrary non-negative
// class ids; the classes present become the model's classes. Throws
// std::invalid_argument when fewer than two classes are present or sizes
// disagree.
ProbeModel fit_probe(const Eigen::Ref<const Eigen::MatrixXd>& features,
                     std::span<const int> labels, const ProbeOptions& options,
                     std::uint64_t seed);

// Rows are class probabilities in the order of model.classes.
Eigen::MatrixXd probe_scores(const ProbeModel& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& features);

// Regularized objective and its gradient at a flattened parameter vector,
// laid out class by class as [w_k (dims), b_k], on standardized features.
double probe_objective(const Eigen::Ref<const Eigen::MatrixXd>& standardized,
                       std::span<const int> class_index, int num_classes,
                       double l2, const Eigen::VectorXd& params,
                       Eigen::VectorXd* gradient = nullptr);

}  // namespace fairemb

#endif  // FAIREMB_PROBE_HPP_
