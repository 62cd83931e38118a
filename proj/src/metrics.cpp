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


#include "fairemb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/core.h>

namespace fairemb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CellTable empty_table(const GroupCells& groups) {
  const auto c = static_cast<Eigen::Index>(groups.size());
  return {groups.labels(), Eigen::MatrixXd::Constant(c, c, kNaN),
          Eigen::MatrixXi::Zero(c, c)};
}

// Mean of one cell's scores: the minimum plus the mean offset from it, the
// offsets summed in ascending order. Independent of pair order, and exact
// when all scores agree.
double cell_mean(std::vector<double>& scores) {
  std::sort(scores.begin(), scores.end());
  const double base = scores.front();
  double offset = 0.0;
  for (double s : scores) offset += s - base;
  return base + offset / static_cast<double>(scores.size());
}

// Population variance with values summed in ascending order.
double population_variance(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double x : values) var += (x - mean) * (x - mean);
  return var / static_cast<double>(values.size());
}

// Largest difference between the rates of non-empty cells.
std::optional<double> largest_gap(const CellTable& table) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  int cells = 0;
  for (Eigen::Index a = 0; a < table.count.rows(); ++a) {
    for (Eigen::Index b = a; b < table.count.cols(); ++b) {
      if (table.count(a, b) == 0) continue;
      lo = std::min(lo, table.rate(a, b));
      hi = std::max(hi, table.rate(a, b));
      ++cells;
    }
  }
  if (cells < 2) return std::nullopt;
  return hi - lo;
}

ParityResult parity(const ScoredPairs& scored, const GroupCells& groups,
                    bool edges_only) {
  ParityResult result{std::nullopt, empty_table(groups)};
  const auto c = static_cast<Eigen::Index>(groups.size());
  std::vector<std::vector<double>> members(static_cast<std::size_t>(c * c));
  for (const ScoredPair& p : scored) {
    if (edges_only) {
      if (!p.label) throw std::invalid_argument("unlabelled pair");
      if (!*p.label) continue;
    }
    const auto cell = groups.cell(p.u, p.v);
    if (!cell) continue;
    members[static_cast<std::size_t>(cell->first * c + cell->second)].push_back(p.score);
  }
  for (Eigen::Index a = 0; a < c; ++a) {
    for (Eigen::Index b = a; b < c; ++b) {
      auto& m = members[static_cast<std::size_t>(a * c + b)];
      if (m.empty()) continue;
      result.table.count(a, b) = result.table.count(b, a) = static_cast<int>(m.size());
      result.table.rate(a, b) = result.table.rate(b, a) = cell_mean(m);
    }
  }
  result.value = largest_gap(result.table);
  return result;
}

}  // namespace

double auc(std::span<const double> scores,
           std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) {
    throw std::invalid_argument("scores and labels disagree in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their average.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        positive_rank_sum += rank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(scores.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw std::invalid_argument("AUC needs both positive and negative examples");
  }
  const double u = positive_rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

double auc(const ScoredPairs& scored) {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  scores.reserve(scored.size());
  labels.reserve(scored.size());
  for (const ScoredPair& p : scored) {
    if (!p.label) throw std::invalid_argument("AUC needs labelled pairs");
    scores.push_back(p.score);
    labels.push_back(*p.label);
  }
  return auc(scores, labels);
}

GroupCells::GroupCells(std::span<const ValueIndex> values,
                       std::vector<std::string> value_names,
                       bool unattributed_cells)
    : values_(values.begin(), values.end()),
      labels_(std::move(value_names)),
      unattributed_cells_(unattributed_cells) {
  for (ValueIndex v : values_) {
    if (v != kMissing && (v < 0 || v >= static_cast<ValueIndex>(labels_.size()))) {
      throw std::invalid_argument("group value outside the label list");
    }
  }
  if (unattributed_cells_) labels_.push_back("@none");
}

std::optional<std::pair<int, int>> GroupCells::cell(NodeIndex u,
                                                     NodeIndex v) const {
  int a = values_.at(static_cast<std::size_t>(u));
  int b = values_.at(static_cast<std::size_t>(v));
  const int none = static_cast<int>(labels_.size()) - 1;
  if (a == kMissing && b == kMissing) return std::nullopt;
  if (a == kMissing || b == kMissing) {
    if (!unattributed_cells_) return std::nullopt;
    if (a == kMissing) a = none;
    if (b == kMissing) b = none;
  }
  if (a > b) std::swap(a, b);
  return std::pair{a, b};
}

ParityResult demographic_parity(const ScoredPairs& scored,
                                const GroupCells& groups) {
  return parity(scored, groups, false);
}

ParityResult equalized_opportunity(const ScoredPairs& scored,
                                   const GroupCells& groups) {
  return parity(scored, groups, true);
}

AcceptanceResult acceptance_rate_parity(const ScoredPairs& scored,
                                        const GroupCells& groups,
                                        double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw std::invalid_argument("k must lie in (0, 100]");
  }
  AcceptanceResult result{std::nullopt, empty_table(groups), k_percent, 0};
  const std::size_t n = scored.size();
  if (n == 0) return result;
  // Guard against k * n / 100 landing a hair above an integer.
  const double wanted = std::ceil(k_percent * static_cast<double>(n) / 100.0 - 1e-9);
  result.accepted = std::clamp<std::size_t>(static_cast<std::size_t>(wanted), 1, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const ScoredPair& x = scored[a];
    const ScoredPair& y = scored[b];
    if (x.score != y.score) return x.score > y.score;
    return std::pair{x.u, x.v} < std::pair{y.u, y.v};
  });
  std::vector<char> accepted(n, 0);
  for (std::size_t i = 0; i < result.accepted; ++i) accepted[order[i]] = 1;

  const auto c = static_cast<Eigen::Index>(groups.size());
  Eigen::MatrixXi hits = Eigen::MatrixXi::Zero(c, c);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cell = groups.cell(scored[i].u, scored[i].v);
    if (!cell) continue;
    ++result.table.count(cell->first, cell->second);
    if (accepted[i]) ++hits(cell->first, cell->second);
  }
  std::vector<double> alpha;
  for (Eigen::Index a = 0; a < c; ++a) {
    for (Eigen::Index b = a; b < c; ++b) {
      const int count = result.table.count(a, b);
      if (count == 0) continue;
      const double rate = static_cast<double>(hits(a, b)) / count;
      result.table.rate(a, b) = result.table.rate(b, a) = rate;
      result.table.count(b, a) = count;
      alpha.push_back(rate);
    }
  }
  if (alpha.size() >= 2) result.value = population_variance(std::move(alpha));
  return result;
}

RepresentationBias representation_bias(
    const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
    std::span<const ValueIndex> values, std::size_t num_values,
    const RepresentationBiasOptions& options, std::uint64_t seed) {
  if (static_cast<std::size_t>(embeddings.rows()) != values.size()) {
    throw std::invalid_argument("embeddings and attribute values disagree");
  }
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0) ||
      options.l2_grid.empty()) {
    throw std::invalid_argument("invalid representation-bias options");
  }
  std::vector<Eigen::Index> rows;
  std::vector<char> seen(num_values, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == kMissing) continue;
    if (values[i] < 0 || static_cast<std::size_t>(values[i]) >= num_values) {
      throw std::invalid_argument("attribute value out of range");
    }
    rows.push_back(static_cast<Eigen::Index>(i));
    seen[values[i]] = 1;
  }
  if (std::count(seen.begin(), seen.end(), 1) < 2) {
    throw std::invalid_argument("representation bias needs two attribute values");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto n = static_cast<long long>(rows.size());
  const long long n_train = std::clamp<long long>(
      std::llround(options.train_fraction * static_cast<double>(n)), 1, n - 1);

  Eigen::MatrixXd train_x(n_train, embeddings.cols());
  Eigen::MatrixXd test_x(n - n_train, embeddings.cols());
  std::vector<int> train_y;
  std::vector<int> test_y;
  for (long long i = 0; i < n; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    if (i < n_train) {
      train_x.row(i) = embeddings.row(r);
      train_y.push_back(values[r]);
    } else {
      test_x.row(i - n_train) = embeddings.row(r);
      test_y.push_back(values[r]);
    }
  }

  RepresentationBias best;
  best.value = -1.0;
  for (double l2 : options.l2_grid) {
    RepresentationBias current;
    current.l2 = l2;
    current.train_nodes = static_cast<std::size_t>(n_train);
    current.test_nodes = test_y.size();
    const ProbeModel probe = fit_probe(train_x, train_y, {l2}, seed);
    const Eigen::MatrixXd scores = probe_scores(probe, test_x);
    std::vector<double> support(num_values, 0.0);
    for (int y : test_y) support[y] += 1.0;
    double included = 0.0;
    current.class_auc.assign(num_values, kNaN);
    current.class_weight.assign(num_values, 0.0);
    for (std::size_t c = 0; c < num_values; ++c) {
      if (support[c] == 0.0) {
        current.diagnostics.push_back(
            fmt::format("class {} absent from the test fold; excluded", c));
        continue;
      }
      if (support[c] == static_cast<double>(test_y.size())) {
        current.diagnostics.push_back(
            fmt::format("class {} is the whole test fold; excluded", c));
        continue;
      }
      const auto col = std::find(probe.classes.begin(), probe.classes.end(),
                                 static_cast<int>(c));
      std::vector<double> s(test_y.size(), 0.0);
      if (col == probe.classes.end()) {
        current.diagnostics.push_back(fmt::format(
            "class {} absent from the training fold; scored as 0", c));
      } else {
        const auto k = col - probe.classes.begin();
        for (std::size_t i = 0; i < s.size(); ++i) {
          s[i] = scores(static_cast<Eigen::Index>(i), k);
        }
      }
      std::vector<std::uint8_t> positive(test_y.size());
      for (std::size_t i = 0; i < test_y.size(); ++i) {
        positive[i] = test_y[i] == static_cast<int>(c);
      }
      current.class_auc[c] = auc(s, positive);
      current.class_weight[c] = support[c];
      included += support[c];
    }
    if (included == 0.0) {
      throw std::invalid_argument("no class can be scored on the test fold");
    }
    current.value = 0.0;
    for (std::size_t c = 0; c < num_values; ++c) {
      current.class_weight[c] /= included;
      if (current.class_weight[c] > 0.0) {
        current.value += current.class_weight[c] * current.class_auc[c];
      }
    }
    if (current.value > best.value) best = std::move(current);
  }
  return best;
}

}  // namespace fairemb
