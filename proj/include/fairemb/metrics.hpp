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


#ifndef FAIREMB_METRICS_HPP_
#define FAIREMB_METRICS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairemb/graph.hpp"
#include "fairemb/probe.hpp"
#include "fairemb/scored_pairs.hpp"

namespace fairemb {

// Probability that a random positive outranks a random negative, ties
// counting 1/2, from average ranks. Throws std::invalid_argument unless both
// classes are present (and, for pairs, every pair is labelled).
double auc(std::span<const double> scores,
           std::span<const std::uint8_t> positive);
double auc(const ScoredPairs& scored);

// Group labels of the pairs: cell (a, b) is the unordered pair of the
// endpoints' values. Pairs with an unattributed endpoint are dropped, unless
// `unattributed_cells` is set, in which case a pair with exactly one
// unattributed endpoint falls into the cell (a, none) (bipartite graphs with
// one attributed side).
class GroupCells {
 public:
  GroupCells(std::span<const ValueIndex> values,
             std::vector<std::string> value_names,
             bool unattributed_cells = false);

  // Row/column labels of the tables; "@none" last when enabled.
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  // Table coordinates of a pair, or nullopt when it belongs to no cell.
  std::optional<std::pair<int, int>> cell(NodeIndex u, NodeIndex v) const;

 private:
  std::vector<ValueIndex> values_;
  std::vector<std::string> labels_;
  bool unattributed_cells_ = false;
};

// Symmetric per-cell table of a rate and the number of pairs behind it.
// Empty cells have count 0 and rate NaN.
struct CellTable {
  std::vector<std::string> labels;
  Eigen::MatrixXd rate;
  Eigen::MatrixXi count;
};

struct ParityResult {
  // Absent when fewer than two cells are non-empty.
  std::optional<double> value;
  CellTable table;
};

// delta_ab = mean score of the pairs in cell (a, b); DP = largest difference
// between non-empty cells. Cell means are taken as min + mean offset from the
// min with offsets summed in ascending order, so they do not depend on pair
// order and are exact for constant cells.
ParityResult demographic_parity(const ScoredPairs& scored,
                                const GroupCells& groups);
// epsilon_ab = mean score of the labelled edges in cell (a, b); EO = largest
// difference between cells holding an edge.
ParityResult equalized_opportunity(const ScoredPairs& scored,
                                   const GroupCells& groups);

struct AcceptanceResult {
  std::optional<double> value;
  CellTable table;
  double k_percent = 10.0;
  std::size_t accepted = 0;
};

// The top ceil(k% of pairs) by score are accepted, ties going to the smaller
// canonical pair; alpha_ab = accepted share of cell (a, b); ARP = population
// variance of alpha over non-empty cells, summed in ascending order.
AcceptanceResult acceptance_rate_parity(const ScoredPairs& scored,
                                        const GroupCells& groups,
                                        double k_percent);

struct RepresentationBiasOptions {
  std::vector<double> l2_grid = {0.01, 0.1, 1.0, 10.0};
  double train_fraction = 0.8;
};

struct RepresentationBias {
  double value = 0.5;
  double l2 = 1.0;
  // Per class of the attribute: one-vs-rest AUC (NaN when excluded) and
  // the weight it received.
  std::vector<double> class_auc;
  std::vector<double> class_weight;
  std::size_t train_nodes = 0;
  std::size_t test_nodes = 0;
  std::vector<std::string> diagnostics;
};

// Splits the attributed rows 80/20 (seeded), fits a probe per l2 on the
// training fold and scores the test fold. Each class's one-vs-rest AUC is
// weighted by its share of the test fold; classes missing from the test fold
// are excluded with a diagnostic. The largest result over the grid is
// reported. Rows with kMissing are ignored. Throws std::invalid_argument
// when fewer than two values are present.
RepresentationBias representation_bias(
    const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
    std::span<const ValueIndex> values, std::size_t num_values,
    const RepresentationBiasOptions& options, std::uint64_t seed);

struct MetricReport {
  std::optional<double> auc;
  std::map<std::string, ParityResult> dp;
  std::map<std::string, ParityResult> eo;
  std::map<std::string, AcceptanceResult> arp;
  std::map<std::string, RepresentationBias> rb;
};

}  // namespace fairemb

#endif  // FAIREMB_METRICS_HPP_
