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


#ifndef FAIREMB_IO_HPP_
#define FAIREMB_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairemb/cne.hpp"
#include "fairemb/graph.hpp"
#include "fairemb/prior.hpp"
#include "fairemb/scored_pairs.hpp"

namespace fairemb {

// Edges file: one "u<TAB>v" per line; blank lines and lines starting with
// '#' are skipped. Throws DataError with the line number on malformed input.
std::vector<RawEdge> load_edge_tsv(const std::filesystem::path& path);
void write_edge_tsv(const std::filesystem::path& path,
                    const AttributedGraph& graph);

// Attributes file: "node<TAB>attribute<TAB>value" rows after a header of
//   #%<TAB>attribute<TAB>value1<TAB>value2...
// lines declaring each attribute's value set. The reserved attribute "@part"
// (values 0/1) marks a bipartite graph. Nodes listed here but absent from the
// edges file are kept as isolated nodes.
struct AttributeTable {
  AttributeSchema schema;
  SensitiveAssignment assignment;
  std::vector<std::string> nodes;
  std::optional<std::map<std::string, int>> parts;
};

AttributeTable load_attr_tsv(const std::filesystem::path& path);
void write_attr_tsv(const std::filesystem::path& path,
                    const AttributedGraph& graph);

AttributedGraph load_graph(const std::filesystem::path& edges,
                           const std::optional<std::filesystem::path>& attrs);

// MovieLens-100k native files u.data and u.user. Users become "u<id>" with
// attributes gender, age and occupation; movies become "m<id>" without
// attributes. One edge per distinct (user, movie) rating.
AttributedGraph load_movielens(const std::filesystem::path& dir);

// <18, 18-24, 25-34, 35-44, 45-54, 55-64, 65+.
const std::vector<std::string>& age_brackets();
const std::string& age_bracket(int age);

struct SbmSpec {
  std::size_t nodes = 300;
  std::vector<double> proportions = {0.5, 0.5};
  double p_in = 0.05;
  double p_out = 0.005;
  std::uint64_t seed = 0;
  // When set, a bipartite graph with this many left nodes; the remaining
  // nodes form the right part. Group proportions apply within each part.
  std::optional<std::size_t> left_nodes;
};

// Nodes "n<i>" (bipartite: "l<i>", "r<i>") in contiguous groups sized by
// largest remainder; attribute "group" with values "g0", "g1", ...
AttributedGraph generate_sbm(const SbmSpec& spec);

// CSV "node,dim_0,...,dim_{d-1}" with 17 significant digits.
void write_embeddings(const std::filesystem::path& path,
                      const EmbeddingModel& emb);
// Rows in file order. Spreads are left at their defaults; the file does not
// carry them.
EmbeddingModel read_embeddings(const std::filesystem::path& path);
// Rows reordered to the node order of `graph`; every node needs a row.
EmbeddingModel align_embeddings(const EmbeddingModel& emb,
                                const AttributedGraph& graph);

// Text form of a fitted prior: a header with the spec and fit diagnostics,
// then one "node<TAB>attribute<TAB>value<TAB>multiplier<TAB>pin" row per
// multiplier ("*" marks the density and degree positions, "@none" the
// unattributed term). Reading requires the graph the prior was fitted on.
void write_prior(const std::filesystem::path& path, const PriorModel& prior,
                 const AttributedGraph& graph);
PriorModel read_prior(const std::filesystem::path& path,
                      const AttributedGraph& graph);

// "u<TAB>v<TAB>score<TAB>label" with label 1, 0 or '-' and score '-' for
// unscored pairs (read as 0). Reading maps ids through `graph`.
void write_scored_pairs(const std::filesystem::path& path,
                        const ScoredPairs& pairs, const AttributedGraph& graph);
ScoredPairs read_scored_pairs(const std::filesystem::path& path,
                              const AttributedGraph& graph);

// train.tsv, attrs.tsv and test.tsv (unscored labelled pairs) under `dir`.
void write_split(const std::filesystem::path& dir, const TrainTestSplit& split);

}  // namespace fairemb

#endif  // FAIREMB_IO_HPP_
