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

#ifndef FAIREMB_GRAPH_HPP_
#define FAIREMB_GRAPH_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fairemb {

// Dense node index in [0, num_nodes).
using NodeIndex = std::int32_t;

// Value index into an attribute's value set; kMissing marks an unattributed
// node.
using ValueIndex = std::int32_t;
inline constexpr ValueIndex kMissing = -1;

// Canonical undirected edge, u < v.
struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeIndex a, NodeIndex b) {
  return a < b ? Edge{a, b} : Edge{b, a};
}

using RawEdge = std::pair<std::string, std::string>;

struct Attribute {
  std::string name;
  std::vector<std::string> values;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

// Ordered list of categorical attributes with their finite value sets.
class AttributeSchema {
 public:
  AttributeSchema() = default;
  explicit AttributeSchema(std::vector<Attribute> attributes);

  // Throws DataError on duplicate names, empty or repeated values.
  void add(Attribute attribute);

  std::size_t size() const { return attributes_.size(); }
  bool empty() const { return attributes_.empty(); }
  const Attribute& operator[](std::size_t i) const { return attributes_[i]; }
  const std::vector<Attribute>& attributes() const { return attributes_; }

  std::optional<std::size_t> find(const std::string& name) const;
  std::optional<ValueIndex> value_index(std::size_t attribute,
                                        const std::string& value) const;

  friend bool operator==(const AttributeSchema&,
                         const AttributeSchema&) = default;

 private:
  std::vector<Attribute> attributes_;
};

// node id -> attribute name -> value. Absent entries mean unattributed.
using SensitiveAssignment =
    std::map<std::string, std::map<std::string, std::string>>;

struct GraphOptions {
  // Nodes kept even when they have no edges and no attributes.
  std::vector<std::string> extra_nodes;
  // When set the graph is bipartite; every node needs a part in {0, 1}.
  std::optional<std::map<std::string, int>> parts;
};

// Immutable undirected attributed graph. Node indices follow the natural
// (digit-aware) order of the node ids, so construction does not depend on
// the order edges were supplied in.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  std::size_t num_nodes() const { return ids_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::string& id(NodeIndex u) const { return ids_[u]; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<NodeIndex> find(const std::string& id) const;
  // Throws DataError for unknown ids.
  NodeIndex index(const std::string& id) const;

  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const NodeIndex> neighbors(NodeIndex u) const {
    return adjacency_[u];
  }
  bool has_edge(NodeIndex u, NodeIndex v) const;
  std::size_t degree(NodeIndex u) const { return adjacency_[u].size(); }
  // Neighbours v of u with attribute `attribute` equal to `value`.
  std::size_t block_degree(NodeIndex u, std::size_t attribute,
                           ValueIndex value) const;
  // Neighbours of u that lack `attribute`.
  std::size_t unattributed_degree(NodeIndex u, std::size_t attribute) const;

  const AttributeSchema& schema() const { return schema_; }
  // Per-node value of one attribute, kMissing where unattributed.
  std::span<const ValueIndex> attribute_values(std::size_t attribute) const {
    return values_[attribute];
  }
  ValueIndex value_of(NodeIndex u, std::size_t attribute) const {
    return values_[attribute][u];
  }
  SensitiveAssignment assignment() const;

  bool is_bipartite() const { return !parts_.empty(); }
  int part(NodeIndex u) const { return parts_.empty() ? 0 : parts_[u]; }
  const std::vector<NodeIndex>& part_members(int p) const {
    return part_members_[p];
  }

  // Pairs that may carry an edge: all u != v, or cross-part pairs when
  // bipartite.
  bool is_candidate(NodeIndex u, NodeIndex v) const {
    return u != v && (parts_.empty() || parts_[u] != parts_[v]);
  }
  std::size_t num_candidate_pairs() const;

  // Calls f(u, v) with u < v for every candidate pair, in increasing (u, v)
  // order.
  template <typename F>
  void for_each_candidate_pair(F&& f) const {
    const auto n = static_cast<NodeIndex>(num_nodes());
    for (NodeIndex u = 0; u < n; ++u) {
      for (NodeIndex v = u + 1; v < n; ++v) {
        if (parts_.empty() || parts_[u] != parts_[v]) f(u, v);
      }
    }
  }

  // Same nodes, attributes and parts with a different edge set.
  AttributedGraph with_edges(std::vector<Edge> edges) const;

  friend AttributedGraph build_graph(std::span<const RawEdge> edges,
                                     AttributeSchema schema,
                                     const SensitiveAssignment& assignment,
                                     const GraphOptions& options);

 private:
  void index_edges(std::vector<Edge> edges);

  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeIndex> lookup_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeIndex>> adjacency_;
  AttributeSchema schema_;
  std::vector<std::vector<ValueIndex>> values_;
  std::vector<int> parts_;
  std::vector<NodeIndex> part_members_[2];
};

// Canonicalizes and deduplicates `edges`. Throws DataError on self-loops,
// attribute values outside the schema, unknown attributes, and (bipartite)
// same-part edges or nodes without a part.
AttributedGraph build_graph(std::span<const RawEdge> edges,
                            AttributeSchema schema,
                            const SensitiveAssignment& assignment,
                            const GraphOptions& options = {});

// Nodes whose `attribute` equals `value`. Unknown values give an empty set;
// an unknown attribute throws DataError.
std::vector<NodeIndex> group_members(const AttributedGraph& graph,
                                     const std::string& attribute,
                                     const std::string& value);

// Digit-aware ordering: "n2" < "n10".
bool natural_less(const std::string& a, const std::string& b);

struct TrainTestSplit {
  AttributedGraph train;
  std::vector<Edge> test_positives;
  std::vector<Edge> test_negatives;
  std::uint64_t seed = 0;
};

// Holds out round(test_fraction * |E|) edges and samples as many non-edges
// uniformly without replacement from the candidate space. Deterministic in
// `seed`.
TrainTestSplit split_edges(const AttributedGraph& graph, double test_fraction,
                           std::uint64_t seed);

}  // namespace fairemb

#endif  // FAIREMB_GRAPH_HPP_
