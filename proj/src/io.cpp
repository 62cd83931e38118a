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


#include "fairemb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <fmt/core.h>
#include <fmt/os.h>

#include "fairemb/errors.hpp"

namespace fairemb {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPartAttribute = "@part";
constexpr const char* kNodeAttribute = "@node";
constexpr const char* kUnattributed = "@none";

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw DataError(fmt::format("error writing {}", path.string()));
}

// Reads lines, stripping a trailing '\r'. Line numbers start at 1.
class LineReader {
 public:
  explicit LineReader(const fs::path& path)
      : path_(path), in_(open_input(path)) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(fmt::format("{}:{}: {}", path_.string(), number_, what));
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::size_t number_ = 0;
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool skippable(const std::string& line) {
  return line.empty() || line.front() == '#';
}

std::optional<double> parse_double(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(const std::string& text) {
  long long value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

std::vector<RawEdge> load_edge_tsv(const fs::path& path) {
  LineReader reader(path);
  std::vector<RawEdge> edges;
  std::string line;
  while (reader.next(line)) {
    if (skippable(line)) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      reader.fail("expected 'u<TAB>v'");
    }
    edges.emplace_back(fields[0], fields[1]);
  }
  return edges;
}

void write_edge_tsv(const fs::path& path, const AttributedGraph& graph) {
  auto out = open_output(path);
  for (const Edge& e : graph.edges()) {
    out << graph.id(e.u) << '\t' << graph.id(e.v) << '\n';
  }
  finish(out, path);
}

AttributeTable load_attr_tsv(const fs::path& path) {
  LineReader reader(path);
  AttributeTable table;
  std::unordered_set<std::string> known_nodes;
  auto note_node = [&](const std::string& node) {
    if (known_nodes.insert(node).second) table.nodes.push_back(node);
  };
  std::string line;
  while (reader.next(line)) {
    if (line.rfind("#%", 0) == 0) {
      const auto fields = split(line, '\t');
      if (fields.size() < 3 || fields[0] != "#%" || fields[1].empty()) {
        reader.fail("expected '#%<TAB>attribute<TAB>value...'");
      }
      if (fields[1].front() == '@') reader.fail("reserved attribute name");
      try {
        table.schema.add(
            {fields[1], std::vector<std::string>(fields.begin() + 2, fields.end())});
      } catch (const DataError& e) {
        reader.fail(e.what());
      }
      continue;
    }
    if (skippable(line)) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      reader.fail("expected 'node<TAB>attribute<TAB>value'");
    }
    const std::string& node = fields[0];
    const std::string& attr = fields[1];
    const std::string& value = fields[2];
    if (attr == kPartAttribute) {
      if (value != "0" && value != "1") reader.fail("part must be 0 or 1");
      if (!table.parts) table.parts.emplace();
      if (!table.parts->emplace(node, value == "0" ? 0 : 1).second) {
        reader.fail(fmt::format("duplicate part for node '{}'", node));
      }
      note_node(node);
      continue;
    }
    if (attr == kNodeAttribute) {
      note_node(node);
      continue;
    }
    const auto k = table.schema.find(attr);
    if (!k) reader.fail(fmt::format("undeclared attribute '{}'", attr));
    if (!table.schema.value_index(*k, value)) {
      reader.fail(
          fmt::format("value '{}' is not declared for attribute '{}'", value, attr));
    }
    if (!table.assignment[node].emplace(attr, value).second) {
      reader.fail(fmt::format("duplicate value of '{}' for node '{}'", attr, node));
    }
    note_node(node);
  }
  return table;
}

void write_attr_tsv(const fs::path& path, const AttributedGraph& graph) {
  auto out = open_output(path);
  for (const Attribute& a : graph.schema().attributes()) {
    out << "#%\t" << a.name;
    for (const auto& v : a.values) out << '\t' << v;
    out << '\n';
  }
  const auto n = static_cast<NodeIndex>(graph.num_nodes());
  for (NodeIndex u = 0; u < n; ++u) {
    bool listed = false;
    if (graph.is_bipartite()) {
      out << graph.id(u) << '\t' << kPartAttribute << '\t' << graph.part(u) << '\n';
      listed = true;
    }
    for (std::size_t k = 0; k < graph.schema().size(); ++k) {
      const ValueIndex s = graph.value_of(u, k);
      if (s == kMissing) continue;
      out << graph.id(u) << '\t' << graph.schema()[k].name << '\t'
          << graph.schema()[k].values[s] << '\n';
      listed = true;
    }
    if (!listed && graph.degree(u) == 0) {
      out << graph.id(u) << '\t' << kNodeAttribute << "\t1\n";
    }
  }
  finish(out, path);
}

AttributedGraph load_graph(const fs::path& edges,
                           const std::optional<fs::path>& attrs) {
  const auto raw = load_edge_tsv(edges);
  if (!attrs) return build_graph(raw, {}, {}, {});
  AttributeTable table = load_attr_tsv(*attrs);
  GraphOptions options;
  options.extra_nodes = std::move(table.nodes);
  options.parts = std::move(table.parts);
  return build_graph(raw, std::move(table.schema), table.assignment, options);
}

const std::vector<std::string>& age_brackets() {
  static const std::vector<std::string> brackets = {
      "<18", "18-24", "25-34", "35-44", "45-54", "55-64", "65+"};
  return brackets;
}

const std::string& age_bracket(int age) {
  static constexpr int kUpper[] = {18, 25, 35, 45, 55, 65};
  std::size_t i = 0;
  while (i < std::size(kUpper) && age >= kUpper[i]) ++i;
  return age_brackets()[i];
}

AttributedGraph load_movielens(const fs::path& dir) {
  const fs::path users_path = dir / "u.user";
  const fs::path ratings_path = dir / "u.data";
  for (const auto& p : {users_path, ratings_path}) {
    if (!fs::is_regular_file(p)) {
      throw DataError(fmt::format("missing MovieLens file {}", p.string()));
    }
  }

  SensitiveAssignment assignment;
  std::map<std::string, int> parts;
  std::vector<std::string> nodes;
  std::set<std::string> genders;
  std::set<std::string> occupations;
  {
    LineReader reader(users_path);
    std::string line;
    while (reader.next(line)) {
      if (line.empty()) continue;
      const auto f = split(line, '|');
      if (f.size() != 5) reader.fail("expected 'id|age|gender|occupation|zip'");
      const auto id = parse_int(f[0]);
      const auto age = parse_int(f[1]);
      if (!id || !age || *age < 0 || f[2].empty() || f[3].empty()) {
        reader.fail("malformed user row");
      }
      const std::string node = "u" + f[0];
      if (parts.count(node)) reader.fail(fmt::format("duplicate user {}", f[0]));
      parts[node] = 0;
      nodes.push_back(node);
      assignment[node] = {{"gender", f[2]},
                          {"age", age_bracket(static_cast<int>(*age))},
                          {"occupation", f[3]}};
      genders.insert(f[2]);
      occupations.insert(f[3]);
    }
  }

  std::vector<RawEdge> edges;
  {
    LineReader reader(ratings_path);
    std::string line;
    while (reader.next(line)) {
      if (line.empty()) continue;
      const auto f = split(line, '\t');
      if (f.size() != 4 || !parse_int(f[0]) || !parse_int(f[1])) {
        reader.fail("expected 'user<TAB>item<TAB>rating<TAB>timestamp'");
      }
      const std::string user = "u" + f[0];
      if (!parts.count(user)) reader.fail(fmt::format("unknown user {}", f[0]));
      const std::string movie = "m" + f[1];
      parts.emplace(movie, 1);
      edges.emplace_back(user, movie);
    }
  }

  AttributeSchema schema;
  schema.add({"gender", {genders.begin(), genders.end()}});
  schema.add({"age", age_brackets()});
  schema.add({"occupation", {occupations.begin(), occupations.end()}});
  GraphOptions options;
  options.extra_nodes = std::move(nodes);
  options.parts = std::move(parts);
  return build_graph(edges, std::move(schema), assignment, options);
}

AttributedGraph generate_sbm(const SbmSpec& spec) {
  const std::size_t groups = spec.proportions.size();
  if (groups == 0) throw std::invalid_argument("SBM needs at least one group");
  double total = 0.0;
  for (double p : spec.proportions) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative group proportion");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("group proportions must sum to 1");
  }
  for (double p : {spec.p_in, spec.p_out}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("SBM probabilities must lie in [0, 1]");
    }
  }
  if (spec.left_nodes && *spec.left_nodes > spec.nodes) {
    throw std::invalid_argument("left part larger than the graph");
  }

  // Largest-remainder group sizes, contiguous blocks.
  auto group_labels = [&](std::size_t count) {
    std::vector<std::size_t> size(groups);
    std::vector<double> remainder(groups);
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      const double exact = spec.proportions[g] * static_cast<double>(count);
      size[g] = static_cast<std::size_t>(std::floor(exact));
      remainder[g] = exact - static_cast<double>(size[g]);
      assigned += size[g];
    }
    std::vector<std::size_t> order(groups);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return remainder[a] > remainder[b];
    });
    for (std::size_t i = 0; assigned < count; ++i, ++assigned) {
      ++size[order[i % groups]];
    }
    std::vector<std::size_t> labels;
    for (std::size_t g = 0; g < groups; ++g) labels.insert(labels.end(), size[g], g);
    return labels;
  };

  std::vector<std::string> ids;
  std::vector<std::size_t> group;
  std::map<std::string, int> parts;
  if (spec.left_nodes) {
    const std::size_t left = *spec.left_nodes;
    const auto lg = group_labels(left);
    const auto rg = group_labels(spec.nodes - left);
    for (std::size_t i = 0; i < left; ++i) {
      ids.push_back(fmt::format("l{}", i));
      group.push_back(lg[i]);
      parts[ids.back()] = 0;
    }
    for (std::size_t i = 0; i < spec.nodes - left; ++i) {
      ids.push_back(fmt::format("r{}", i));
      group.push_back(rg[i]);
      parts[ids.back()] = 1;
    }
  } else {
    group = group_labels(spec.nodes);
    for (std::size_t i = 0; i < spec.nodes; ++i) ids.push_back(fmt::format("n{}", i));
  }

  Attribute attribute{"group", {}};
  for (std::size_t g = 0; g < groups; ++g) {
    attribute.values.push_back(fmt::format("g{}", g));
  }
  SensitiveAssignment assignment;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    assignment[ids[i]]["group"] = attribute.values[group[i]];
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<RawEdge> edges;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (spec.left_nodes && parts[ids[i]] == parts[ids[j]]) continue;
      const double p = group[i] == group[j] ? spec.p_in : spec.p_out;
      if (unit(rng) < p) edges.emplace_back(ids[i], ids[j]);
    }
  }

  GraphOptions options;
  options.extra_nodes = ids;
  if (spec.left_nodes) options.parts = std::move(parts);
  return build_graph(edges, AttributeSchema({attribute}), assignment, options);
}

void write_embeddings(const fs::path& path, const EmbeddingModel& emb) {
  if (emb.nodes.size() != static_cast<std::size_t>(emb.z.rows())) {
    throw std::invalid_argument("embedding rows and node names disagree");
  }
  auto out = open_output(path);
  out << "node";
  for (Eigen::Index j = 0; j < emb.z.cols(); ++j) out << ",dim_" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < emb.z.rows(); ++i) {
    out << emb.nodes[i];
    for (Eigen::Index j = 0; j < emb.z.cols(); ++j) {
      out << ',' << fmt::format("{:.17g}", emb.z(i, j));
    }
    out << '\n';
  }
  finish(out, path);
}

EmbeddingModel read_embeddings(const fs::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) reader.fail("empty embeddings file");
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "node") {
    reader.fail("header must be 'node,dim_0,...'");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j + 1] != fmt::format("dim_{}", j)) {
      reader.fail(fmt::format("expected column 'dim_{}'", j));
    }
  }
  EmbeddingModel emb;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != d + 1 || f[0].empty()) {
      reader.fail(fmt::format("expected a node name and {} values", d));
    }
    if (!seen.insert(f[0]).second) {
      reader.fail(fmt::format("duplicate node '{}'", f[0]));
    }
    emb.nodes.push_back(f[0]);
    for (std::size_t j = 0; j < d; ++j) {
      const auto x = parse_double(f[j + 1]);
      if (!x || !std::isfinite(*x)) reader.fail("coordinate is not a finite number");
      values.push_back(*x);
    }
  }
  emb.z = Eigen::Map<const Embedding>(values.data(),
                                      static_cast<Eigen::Index>(emb.nodes.size()),
                                      static_cast<Eigen::Index>(d));
  return emb;
}

EmbeddingModel align_embeddings(const EmbeddingModel& emb,
                                const AttributedGraph& graph) {
  std::unordered_map<std::string, Eigen::Index> row;
  for (std::size_t i = 0; i < emb.nodes.size(); ++i) {
    row.emplace(emb.nodes[i], static_cast<Eigen::Index>(i));
  }
  EmbeddingModel out = emb;
  out.nodes = graph.ids();
  out.z.resize(static_cast<Eigen::Index>(graph.num_nodes()), emb.z.cols());
  for (std::size_t u = 0; u < graph.num_nodes(); ++u) {
    const auto it = row.find(graph.id(static_cast<NodeIndex>(u)));
    if (it == row.end()) {
      throw DataError(
          fmt::format("no embedding for node '{}'", graph.id(static_cast<NodeIndex>(u))));
    }
    out.z.row(static_cast<Eigen::Index>(u)) = emb.z.row(it->second);
  }
  return out;
}

namespace {

std::string slot_key(const PriorLayout::Slot& slot, const PriorLayout& layout,
                     const AttributedGraph& graph) {
  const std::string node = slot.node < 0 ? "*" : graph.id(slot.node);
  if (slot.attribute < 0 && slot.value == kMissing &&
      layout.kind() != PriorKind::kBiased) {
    return node + "\t*\t*";
  }
  if (slot.attribute < 0) return node + "\t" + kUnattributed + "\t*";
  const std::string& name = layout.attributes()[slot.attribute];
  const auto k = graph.schema().find(name);
  return node + "\t" + name + "\t" + graph.schema()[*k].values[slot.value];
}

}  // namespace

void write_prior(const fs::path& path, const PriorModel& prior,
                 const AttributedGraph& graph) {
  if (prior.num_nodes() != graph.num_nodes()) {
    throw std::invalid_argument("prior and graph disagree on nodes");
  }
  const PriorLayout& layout = prior.layout();
  const FitDiagnostics& d = prior.diagnostics();
  auto out = open_output(path);
  out << "#fairemb-prior\t1\n";
  out << "kind\t" << to_string(prior.spec().kind) << '\n';
  out << "attributes";
  for (const auto& a : prior.spec().attributes) out << '\t' << a;
  out << '\n';
  out << "unattributed_term\t"
      << (prior.spec().include_unattributed_degree_term ? 1 : 0) << '\n';
  out << "iterations\t" << d.iterations << '\n';
  out << "converged\t" << (d.converged ? 1 : 0) << '\n';
  out << "max_residual\t" << fmt::format("{:.17g}", d.max_residual) << '\n';
  out << "max_unsaturated_residual\t"
      << fmt::format("{:.17g}", d.max_unsaturated_residual) << '\n';
  out << "saturated\t" << d.saturated << '\n';
  out << "clamped\t" << d.clamped << '\n';
  out << "multipliers\t" << layout.size() << '\n';
  for (std::size_t i = 0; i < layout.size(); ++i) {
    out << slot_key(layout.slot(i), layout, graph) << '\t'
        << fmt::format("{:.17g}", prior.multipliers()(static_cast<Eigen::Index>(i)))
        << '\t' << prior.pins()[i] << '\n';
  }
  finish(out, path);
}

PriorModel read_prior(const fs::path& path, const AttributedGraph& graph) {
  LineReader reader(path);
  std::string line;
  auto header = [&](const std::string& key) {
    if (!reader.next(line)) reader.fail("truncated prior header");
    auto f = split(line, '\t');
    if (f.empty() || f[0] != key) reader.fail(fmt::format("expected '{}'", key));
    f.erase(f.begin());
    return f;
  };
  auto single = [&](const std::string& key) {
    auto f = header(key);
    if (f.size() != 1) reader.fail(fmt::format("'{}' takes one value", key));
    return f[0];
  };
  auto integer = [&](const std::string& key) {
    const auto v = parse_int(single(key));
    if (!v || *v < 0) reader.fail(fmt::format("'{}' must be a count", key));
    return *v;
  };
  auto real = [&](const std::string& key) {
    const auto v = parse_double(single(key));
    if (!v) reader.fail(fmt::format("'{}' must be a number", key));
    return *v;
  };
  if (single("#fairemb-prior") != "1") reader.fail("unsupported prior version");
  PriorSpec spec;
  try {
    spec.kind = parse_prior_kind(single("kind"));
  } catch (const std::invalid_argument& e) {
    reader.fail(e.what());
  }
  spec.attributes = header("attributes");
  spec.include_unattributed_degree_term = integer("unattributed_term") != 0;
  FitDiagnostics diag;
  diag.iterations = static_cast<int>(integer("iterations"));
  diag.converged = integer("converged") != 0;
  diag.max_residual = real("max_residual");
  diag.max_unsaturated_residual = real("max_unsaturated_residual");
  diag.saturated = static_cast<std::size_t>(integer("saturated"));
  diag.clamped = static_cast<std::size_t>(integer("clamped"));
  const auto count = static_cast<std::size_t>(integer("multipliers"));

  PriorLayout layout;
  try {
    layout = PriorLayout(graph, spec);
  } catch (const std::exception& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (layout.size() != count) {
    reader.fail(fmt::format("prior has {} multipliers but the graph implies {}",
                            count, layout.size()));
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    index.emplace(slot_key(layout.slot(i), layout, graph), i);
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
  std::vector<Pin> pins(count, 0);
  std::vector<bool> seen(count, false);
  std::size_t rows = 0;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 5) reader.fail("expected 'node<TAB>attribute<TAB>value<TAB>multiplier<TAB>pin'");
    const auto it = index.find(f[0] + "\t" + f[1] + "\t" + f[2]);
    if (it == index.end()) reader.fail("multiplier does not match the graph");
    if (seen[it->second]) reader.fail("duplicate multiplier");
    const auto x = parse_double(f[3]);
    const auto pin = parse_int(f[4]);
    if (!x || !std::isfinite(*x) || !pin) reader.fail("malformed multiplier row");
    seen[it->second] = true;
    theta(static_cast<Eigen::Index>(it->second)) = *x;
    pins[it->second] = static_cast<Pin>(*pin);
    ++rows;
  }
  if (rows != count) {
    throw DataError(fmt::format("{}: expected {} multiplier rows, found {}",
                                path.string(), count, rows));
  }
  return PriorModel(std::move(spec), std::move(layout), std::move(theta),
                    std::move(pins), diag);
}

void write_scored_pairs(const fs::path& path, const ScoredPairs& pairs,
                        const AttributedGraph& graph) {
  auto out = open_output(path);
  out << "#u\tv\tscore\tlabel\n";
  for (const ScoredPair& p : pairs) {
    out << graph.id(p.u) << '\t' << graph.id(p.v) << '\t'
        << fmt::format("{:.17g}", p.score) << '\t'
        << (p.label ? (*p.label ? "1" : "0") : "-") << '\n';
  }
  finish(out, path);
}

namespace {

void write_unscored(const fs::path& path, const ScoredPairs& pairs,
                    const AttributedGraph& graph) {
  auto out = open_output(path);
  out << "#u\tv\tscore\tlabel\n";
  for (const ScoredPair& p : pairs) {
    out << graph.id(p.u) << '\t' << graph.id(p.v) << "\t-\t"
        << (p.label ? (*p.label ? "1" : "0") : "-") << '\n';
  }
  finish(out, path);
}

}  // namespace

ScoredPairs read_scored_pairs(const fs::path& path,
                              const AttributedGraph& graph) {
  LineReader reader(path);
  ScoredPairs pairs;
  std::string line;
  while (reader.next(line)) {
    if (skippable(line)) continue;
    const auto f = split(line, '\t');
    if (f.size() != 4) reader.fail("expected 'u<TAB>v<TAB>score<TAB>label'");
    const auto u = graph.find(f[0]);
    const auto v = graph.find(f[1]);
    if (!u || !v) reader.fail("pair endpoint is not a node of the graph");
    if (*u == *v) reader.fail("self-pair");
    ScoredPair p;
    const Edge e = make_edge(*u, *v);
    p.u = e.u;
    p.v = e.v;
    if (f[2] != "-") {
      const auto s = parse_double(f[2]);
      if (!s || !(*s >= 0.0 && *s <= 1.0)) reader.fail("score must lie in [0, 1]");
      p.score = *s;
    }
    if (f[3] == "1") {
      p.label = true;
    } else if (f[3] == "0") {
      p.label = false;
    } else if (f[3] != "-") {
      reader.fail("label must be 1, 0 or '-'");
    }
    pairs.push_back(p);
  }
  return pairs;
}

void write_split(const fs::path& dir, const TrainTestSplit& split) {
  fs::create_directories(dir);
  write_edge_tsv(dir / "train.tsv", split.train);
  write_attr_tsv(dir / "attrs.tsv", split.train);
  write_unscored(dir / "test.tsv",
                 labelled_pairs(split.test_positives, split.test_negatives),
                 split.train);
}

}  // namespace fairemb
