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

#include "fairemb/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <fmt/core.h>

#include "fairemb/errors.hpp"

namespace fairemb {

AttributeSchema::AttributeSchema(std::vector<Attribute> attributes) {
  for (auto& a : attributes) add(std::move(a));
}

void AttributeSchema::add(Attribute attribute) {
  if (attribute.name.empty()) throw DataError("attribute name is empty");
  if (find(attribute.name)) {
    throw DataError(fmt::format("duplicate attribute '{}'", attribute.name));
  }
  if (attribute.values.empty()) {
    throw DataError(
        fmt::format("attribute '{}' has no values", attribute.name));
  }
  std::set<std::string> seen;
  for (const auto& v : attribute.values) {
    if (!seen.insert(v).second) {
      throw DataError(fmt::format("attribute '{}' repeats value '{}'",
                                  attribute.name, v));
    }
  }
  attributes_.push_back(std::move(attribute));
}

std::optional<std::size_t> AttributeSchema::find(
    const std::string& name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<ValueIndex> AttributeSchema::value_index(
    std::size_t attribute, const std::string& value) const {
  const auto& values = attributes_.at(attribute).values;
  auto it = std::find(values.begin(), values.end(), value);
  if (it == values.end()) return std::nullopt;
  return static_cast<ValueIndex>(it - values.begin());
}

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ei = i, ej = j;
      while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei]))) ++ei;
      while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej]))) ++ej;
      // Strip leading zeros, then compare by length and digits.
      std::size_t si = i, sj = j;
      while (si + 1 < ei && a[si] == '0') ++si;
      while (sj + 1 < ej && b[sj] == '0') ++sj;
      if (ei - si != ej - sj) return ei - si < ej - sj;
      const int c = a.compare(si, ei - si, b, sj, ej - sj);
      if (c != 0) return c < 0;
      if (ei - i != ej - j) return ei - i < ej - j;
      i = ei;
      j = ej;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  return a < b;
}

std::optional<NodeIndex> AttributedGraph::find(const std::string& id) const {
  auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

NodeIndex AttributedGraph::index(const std::string& id) const {
  auto found = find(id);
  if (!found) throw DataError(fmt::format("unknown node '{}'", id));
  return *found;
}

bool AttributedGraph::has_edge(NodeIndex u, NodeIndex v) const {
  const auto& adj = adjacency_[u];
  return std::binary_search(adj.begin(), adj.end(), v);
}

std::size_t AttributedGraph::block_degree(NodeIndex u, std::size_t attribute,
                                          ValueIndex value) const {
  const auto& values = values_.at(attribute);
  return std::count_if(adjacency_[u].begin(), adjacency_[u].end(),
                       [&](NodeIndex v) { return values[v] == value; });
}

std::size_t AttributedGraph::unattributed_degree(NodeIndex u,
                                                 std::size_t attribute) const {
  return block_degree(u, attribute, kMissing);
}

SensitiveAssignment AttributedGraph::assignment() const {
  SensitiveAssignment out;
  for (std::size_t k = 0; k < schema_.size(); ++k) {
    for (std::size_t u = 0; u < ids_.size(); ++u) {
      if (values_[k][u] != kMissing) {
        out[ids_[u]][schema_[k].name] = schema_[k].values[values_[k][u]];
      }
    }
  }
  return out;
}

std::size_t AttributedGraph::num_candidate_pairs() const {
  const std::size_t n = num_nodes();
  if (parts_.empty()) return n * (n - (n > 0 ? 1 : 0)) / 2;
  return part_members_[0].size() * part_members_[1].size();
}

void AttributedGraph::index_edges(std::vector<Edge> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  adjacency_.assign(ids_.size(), {});
  for (const auto& e : edges) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
  edges_ = std::move(edges);
}

AttributedGraph AttributedGraph::with_edges(std::vector<Edge> edges) const {
  AttributedGraph g;
  g.ids_ = ids_;
  g.lookup_ = lookup_;
  g.schema_ = schema_;
  g.values_ = values_;
  g.parts_ = parts_;
  g.part_members_[0] = part_members_[0];
  g.part_members_[1] = part_members_[1];
  for (const auto& e : edges) {
    if (e.u == e.v || e.u < 0 || e.v < 0 ||
        static_cast<std::size_t>(std::max(e.u, e.v)) >= ids_.size()) {
      throw DataError("edge outside the node range");
    }
  }
  g.index_edges(std::move(edges));
  return g;
}

AttributedGraph build_graph(std::span<const RawEdge> edges,
                            AttributeSchema schema,
                            const SensitiveAssignment& assignment,
                            const GraphOptions& options) {
  std::set<std::string> universe;
  for (const auto& [a, b] : edges) {
    if (a == b) throw DataError(fmt::format("self-loop on node '{}'", a));
    universe.insert(a);
    universe.insert(b);
  }
  for (const auto& [node, attrs] : assignment) universe.insert(node);
  for (const auto& node : options.extra_nodes) universe.insert(node);

  AttributedGraph g;
  g.ids_.assign(universe.begin(), universe.end());
  std::sort(g.ids_.begin(), g.ids_.end(), natural_less);
  for (std::size_t i = 0; i < g.ids_.size(); ++i) {
    g.lookup_.emplace(g.ids_[i], static_cast<NodeIndex>(i));
  }

  g.values_.assign(schema.size(),
                   std::vector<ValueIndex>(g.ids_.size(), kMissing));
  for (const auto& [node, attrs] : assignment) {
    const NodeIndex u = g.lookup_.at(node);
    for (const auto& [name, value] : attrs) {
      auto k = schema.find(name);
      if (!k) {
        throw DataError(
            fmt::format("node '{}' uses unknown attribute '{}'", node, name));
      }
      auto s = schema.value_index(*k, value);
      if (!s) {
        throw DataError(fmt::format(
            "node '{}': value '{}' is not in the value set of '{}'", node,
            value, name));
      }
      g.values_[*k][u] = *s;
    }
  }
  g.schema_ = std::move(schema);

  if (options.parts) {
    g.parts_.assign(g.ids_.size(), -1);
    for (const auto& [node, p] : *options.parts) {
      if (p != 0 && p != 1) {
        throw DataError(fmt::format("node '{}' has part {}, expected 0 or 1",
                                    node, p));
      }
      auto it = g.lookup_.find(node);
      if (it != g.lookup_.end()) g.parts_[it->second] = p;
    }
    for (std::size_t i = 0; i < g.ids_.size(); ++i) {
      if (g.parts_[i] < 0) {
        throw DataError(
            fmt::format("bipartite graph: node '{}' has no part", g.ids_[i]));
      }
      g.part_members_[g.parts_[i]].push_back(static_cast<NodeIndex>(i));
    }
  }

  std::vector<Edge> canonical;
  canonical.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    const Edge e = make_edge(g.lookup_.at(a), g.lookup_.at(b));
    if (!g.parts_.empty() && g.parts_[e.u] == g.parts_[e.v]) {
      throw DataError(fmt::format(
          "bipartite graph: edge ({}, {}) does not cross parts", a, b));
    }
    canonical.push_back(e);
  }
  g.index_edges(std::move(canonical));
  return g;
}

std::vector<NodeIndex> group_members(const AttributedGraph& graph,
                                     const std::string& attribute,
                                     const std::string& value) {
  auto k = graph.schema().find(attribute);
  if (!k) throw DataError(fmt::format("unknown attribute '{}'", attribute));
  std::vector<NodeIndex> out;
  auto s = graph.schema().value_index(*k, value);
  if (!s) return out;
  const auto values = graph.attribute_values(*k);
  for (std::size_t u = 0; u < values.size(); ++u) {
    if (values[u] == *s) out.push_back(static_cast<NodeIndex>(u));
  }
  return out;
}

namespace {

std::uint64_t pair_key(const Edge& e) {
  return (static_cast<std::uint64_t>(e.u) << 32) |
         static_cast<std::uint32_t>(e.v);
}

}  // namespace

TrainTestSplit split_edges(const AttributedGraph& graph, double test_fraction,
                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  const std::size_t m = graph.num_edges();
  if (m < 5) {
    throw DataError(fmt::format("need at least 5 edges to split, got {}", m));
  }
  std::size_t n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(m)));
  n_test = std::clamp<std::size_t>(n_test, 1, m - 1);

  const std::size_t non_edges = graph.num_candidate_pairs() - m;
  if (non_edges < n_test) {
    throw DataError(fmt::format(
        "cannot sample {} test non-edges: only {} non-edges exist", n_test,
        non_edges));
  }

  std::mt19937_64 rng(seed);
  std::vector<Edge> shuffled = graph.edges();
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  TrainTestSplit split;
  split.seed = seed;
  split.test_positives.assign(shuffled.begin(), shuffled.begin() + n_test);
  std::vector<Edge> train(shuffled.begin() + n_test, shuffled.end());
  std::sort(split.test_positives.begin(), split.test_positives.end());

  auto& negatives = split.test_negatives;
  if (non_edges <= 4 * n_test) {
    std::vector<Edge> pool;
    pool.reserve(non_edges);
    graph.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
      if (!graph.has_edge(u, v)) pool.push_back({u, v});
    });
    for (std::size_t i = 0; i < n_test; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    negatives.assign(pool.begin(), pool.begin() + n_test);
  } else {
    std::unordered_set<std::uint64_t> chosen;
    const auto n = static_cast<NodeIndex>(graph.num_nodes());
    std::uniform_int_distribution<NodeIndex> any(0, n - 1);
    while (negatives.size() < n_test) {
      NodeIndex a, b;
      if (graph.is_bipartite()) {
        const auto& left = graph.part_members(0);
        const auto& right = graph.part_members(1);
        a = left[std::uniform_int_distribution<std::size_t>(
            0, left.size() - 1)(rng)];
        b = right[std::uniform_int_distribution<std::size_t>(
            0, right.size() - 1)(rng)];
      } else {
        a = any(rng);
        b = any(rng);
        if (a == b) continue;
      }
      const Edge e = make_edge(a, b);
      if (graph.has_edge(e.u, e.v)) continue;
      if (!chosen.insert(pair_key(e)).second) continue;
      negatives.push_back(e);
    }
  }
  std::sort(negatives.begin(), negatives.end());
  split.train = graph.with_edges(std::move(train));
  return split;
}

}  // namespace fairemb
