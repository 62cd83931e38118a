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


#ifndef FAIREMB_SCORED_PAIRS_HPP_
#define FAIREMB_SCORED_PAIRS_HPP_

#include <optional>
#include <vector>

#include "fairemb/graph.hpp"

namespace fairemb {

// A candidate link with its predicted probability and, when known, whether it
// is an edge of the held-out graph. Pairs are canonical (u < v).
struct ScoredPair {
  NodeIndex u = 0;
  NodeIndex v = 0;
  double score = 0.0;
  std::optional<bool> label;

  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

using ScoredPairs = std::vector<ScoredPair>;

// Test positives labelled true followed by test negatives labelled false,
// scores zero.
ScoredPairs labelled_pairs(const std::vector<Edge>& positives,
                           const std::vector<Edge>& negatives);

}  // namespace fairemb

#endif  // FAIREMB_SCORED_PAIRS_HPP_
