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

#ifndef FAIREMB_TESTS_TEST_UTIL_HPP_
#define FAIREMB_TESTS_TEST_UTIL_HPP_

#include <random>
#include <string>
#include <vector>

#include "fairemb/graph.hpp"

namespace fairemb::testing {

struct RandomGraphSpec {
  int nodes = 10;
  double edge_probability = 0.3;
  // One entry per attribute: number of values.
  std::vector<int> cardinalities;
  double missing_rate = 0.0;
  bool bipartite = false;
};

inline std::string node_name(int i) { return "n" + std::to_string(i); }

// Erdos-Renyi graph with uniformly drawn categorical attributes. In the
// bipartite case even nodes form part 0 and odd nodes part 1.
inline AttributedGraph random_graph(const RandomGraphSpec& spec,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<RawEdge> edges;
  for (int u = 0; u < spec.nodes; ++u) {
    for (int v = u + 1; v < spec.nodes; ++v) {
      if (spec.bipartite && (u % 2) == (v % 2)) continue;
      if (unit(rng) < spec.edge_probability) {
        edges.emplace_back(node_name(u), node_name(v));
      }
    }
  }
  AttributeSchema schema;
  for (std::size_t k = 0; k < spec.cardinalities.size(); ++k) {
    Attribute a{"a" + std::to_string(k), {}};
    for (int s = 0; s < spec.cardinalities[k]; ++s) {
      a.values.push_back("v" + std::to_string(s));
    }
    schema.add(a);
  }
  SensitiveAssignment assignment;
  GraphOptions options;
  if (spec.bipartite) options.parts.emplace();
  for (int u = 0; u < spec.nodes; ++u) {
    options.extra_nodes.push_back(node_name(u));
    if (spec.bipartite) (*options.parts)[node_name(u)] = u % 2;
    for (std::size_t k = 0; k < spec.cardinalities.size(); ++k) {
      if (unit(rng) < spec.missing_rate) continue;
      std::uniform_int_distribution<int> pick(0, spec.cardinalities[k] - 1);
      assignment[node_name(u)][schema[k].name] = "v" + std::to_string(pick(rng));
    }
  }
  return build_graph(edges, schema, assignment, options);
}

}  // namespace fairemb::testing

#endif  // FAIREMB_TESTS_TEST_UTIL_HPP_
