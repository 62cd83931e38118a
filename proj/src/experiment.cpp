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


#include "fairemb/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

#include "fairemb/errors.hpp"

namespace fairemb {

namespace pt = boost::property_tree;

namespace {

const char* to_string(PriorChoice c) {
  return c == PriorChoice::kBiased ? "biased" : "oblivious";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_value(const std::string& section, const std::string& key,
              const std::string& text) {
  std::istringstream in(trim(text));
  T value{};
  in >> value;
  if (!in || !in.eof()) {
    throw ConfigError(fmt::format("[{}] {}: cannot parse '{}'", section, key, text));
  }
  return value;
}

bool parse_bool(const std::string& section, const std::string& key,
                const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(fmt::format("[{}] {}: expected true or false", section, key));
}

PriorChoice parse_choice(const std::string& section, const std::string& key,
                         const std::string& text) {
  const std::string t = trim(text);
  if (t == "oblivious") return PriorChoice::kOblivious;
  if (t == "biased") return PriorChoice::kBiased;
  throw ConfigError(
      fmt::format("[{}] {}: expected 'oblivious' or 'biased'", section, key));
}

template <typename T>
std::vector<T> parse_list(const std::string& section, const std::string& key,
                          const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) {
    out.push_back(parse_value<T>(section, key, item));
  }
  return out;
}

void check_keys(const std::string& section, const pt::ptree& tree,
                const std::set<std::string>& known) {
  for (const auto& [key, _] : tree) {
    if (!known.count(key)) {
      throw ConfigError(fmt::format("[{}]: unknown key '{}'", section, key));
    }
  }
}

std::string format_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

template <typename T>
std::string format_numbers(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += (i ? "," : "") + fmt::format("{}", items[i]);
  }
  return out;
}

// Scores uniform on [0, 1), drawn in pair order.
ScoredPairs random_scores(ScoredPairs pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5deece66dULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& p : pairs) p.score = unit(rng);
  return pairs;
}

}  // namespace

std::vector<Variant> default_variants(bool biased_eval) {
  std::vector<Variant> v = {
      {"CNE", PriorChoice::kOblivious, PriorChoice::kOblivious, false},
      {"DeBayes", PriorChoice::kBiased, PriorChoice::kOblivious, false},
      {"Random", PriorChoice::kOblivious, PriorChoice::kOblivious, true},
  };
  if (biased_eval) {
    v.push_back({"CNE+biased-eval", PriorChoice::kOblivious, PriorChoice::kBiased, false});
    v.push_back({"DeBayes+biased-eval", PriorChoice::kBiased, PriorChoice::kBiased, false});
  }
  return v;
}

ExperimentConfig parse_config(std::istream& in) {
  const std::string text(std::istreambuf_iterator<char>(in), {});
  // read_ini silently drops empty sections; an empty section is an error.
  std::vector<std::string> headers;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      line = trim(line);
      if (!line.empty() && line.front() == '[' && line.back() == ']') {
        headers.push_back(trim(line.substr(1, line.size() - 2)));
      }
    }
  }
  pt::ptree tree;
  try {
    std::istringstream body(text);
    pt::ini_parser::read_ini(body, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  for (const auto& h : headers) {
    if (tree.find(h) == tree.not_found()) {
      throw ConfigError(fmt::format("section [{}] is empty", h));
    }
  }
  ExperimentConfig cfg;
  bool variants_given = false;
  std::vector<Variant> variants;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("key '{}' outside a section", section));
    }
    auto get = [&, &body = body, &section = section](const std::string& key)
        -> std::optional<std::string> {
      const auto v = body.get_optional<std::string>(key);
      if (!v) return std::nullopt;
      return trim(*v);
    };
    if (section == "data") {
      check_keys(section, body,
                 {"source", "edges", "attributes", "movielens_dir", "sbm_nodes",
                  "sbm_proportions", "sbm_p_in", "sbm_p_out", "sbm_seed",
                  "sbm_left_nodes"});
      if (auto v = get("source")) {
        if (*v == "files") {
          cfg.source = DataSource::kFiles;
        } else if (*v == "movielens") {
          cfg.source = DataSource::kMovieLens;
        } else if (*v == "sbm") {
          cfg.source = DataSource::kSbm;
        } else {
          throw ConfigError("[data] source: expected files, movielens or sbm");
        }
      }
      if (auto v = get("edges")) cfg.edges = *v;
      if (auto v = get("attributes")) cfg.attributes = *v;
      if (auto v = get("movielens_dir")) cfg.movielens_dir = *v;
      if (auto v = get("sbm_nodes")) cfg.sbm.nodes = parse_value<std::size_t>(section, "sbm_nodes", *v);
      if (auto v = get("sbm_proportions")) cfg.sbm.proportions = parse_list<double>(section, "sbm_proportions", *v);
      if (auto v = get("sbm_p_in")) cfg.sbm.p_in = parse_value<double>(section, "sbm_p_in", *v);
      if (auto v = get("sbm_p_out")) cfg.sbm.p_out = parse_value<double>(section, "sbm_p_out", *v);
      if (auto v = get("sbm_seed")) cfg.sbm.seed = parse_value<std::uint64_t>(section, "sbm_seed", *v);
      if (auto v = get("sbm_left_nodes")) cfg.sbm.left_nodes = parse_value<std::size_t>(section, "sbm_left_nodes", *v);
    } else if (section == "experiment") {
      check_keys(section, body,
                 {"sensitive", "metric_attributes", "seeds", "test_fraction",
                  "k_percent", "probe_grid", "dp_universe", "biased_eval"});
      if (auto v = get("sensitive")) cfg.sensitive = split_list(*v);
      if (auto v = get("metric_attributes")) cfg.metric_attributes = split_list(*v);
      if (auto v = get("seeds")) cfg.seeds = parse_list<std::uint64_t>(section, "seeds", *v);
      if (auto v = get("test_fraction")) cfg.test_fraction = parse_value<double>(section, "test_fraction", *v);
      if (auto v = get("k_percent")) cfg.k_percent = parse_value<double>(section, "k_percent", *v);
      if (auto v = get("probe_grid")) cfg.probe_grid = parse_list<double>(section, "probe_grid", *v);
      if (auto v = get("dp_universe")) {
        if (*v == "test") {
          cfg.dp_all_pairs = false;
        } else if (*v == "all") {
          cfg.dp_all_pairs = true;
        } else {
          throw ConfigError("[experiment] dp_universe: expected 'test' or 'all'");
        }
      }
      if (auto v = get("biased_eval")) cfg.biased_eval = parse_bool(section, "biased_eval", *v);
    } else if (section == "train") {
      check_keys(section, body,
                 {"dims", "sigma1", "sigma2", "learning_rate", "max_epochs", "tol",
                  "pair_budget"});
      if (auto v = get("dims")) cfg.train.dims = parse_value<int>(section, "dims", *v);
      if (auto v = get("sigma1")) cfg.train.sigma1 = parse_value<double>(section, "sigma1", *v);
      if (auto v = get("sigma2")) cfg.train.sigma2 = parse_value<double>(section, "sigma2", *v);
      if (auto v = get("learning_rate")) cfg.train.learning_rate = parse_value<double>(section, "learning_rate", *v);
      if (auto v = get("max_epochs")) cfg.train.max_epochs = parse_value<int>(section, "max_epochs", *v);
      if (auto v = get("tol")) cfg.train.tol = parse_value<double>(section, "tol", *v);
      if (auto v = get("pair_budget")) cfg.train.pair_budget = parse_value<std::size_t>(section, "pair_budget", *v);
    } else if (section == "prior") {
      check_keys(section, body, {"tol", "max_iter"});
      if (auto v = get("tol")) cfg.prior.tol = parse_value<double>(section, "tol", *v);
      if (auto v = get("max_iter")) cfg.prior.max_iter = parse_value<int>(section, "max_iter", *v);
    } else if (section.rfind("variant.", 0) == 0) {
      check_keys(section, body, {"train_prior", "eval_prior", "random"});
      Variant v;
      v.name = section.substr(8);
      if (auto x = get("train_prior")) v.train_prior = parse_choice(section, "train_prior", *x);
      if (auto x = get("eval_prior")) v.eval_prior = parse_choice(section, "eval_prior", *x);
      if (auto x = get("random")) v.random = parse_bool(section, "random", *x);
      variants.push_back(v);
      variants_given = true;
    } else {
      throw ConfigError(fmt::format("unknown section [{}]", section));
    }
  }
  cfg.variants = variants_given ? variants : default_variants(cfg.biased_eval);
  if (cfg.metric_attributes.empty()) cfg.metric_attributes = cfg.sensitive;
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  ExperimentConfig cfg = parse_config(in);
  // Relative data paths are taken from the config's directory.
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(cfg.edges);
  resolve(cfg.movielens_dir);
  if (cfg.attributes) resolve(*cfg.attributes);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (!(cfg.k_percent > 0.0 && cfg.k_percent <= 100.0)) {
    throw ConfigError("k_percent must lie in (0, 100]");
  }
  if (cfg.probe_grid.empty()) throw ConfigError("probe_grid is empty");
  for (double l2 : cfg.probe_grid) {
    if (!(l2 >= 0.0)) throw ConfigError("probe_grid values must be >= 0");
  }
  if (cfg.train.dims < 1) throw ConfigError("dims must be >= 1");
  if (!(cfg.train.sigma1 > 0.0) || !(cfg.train.sigma2 >= cfg.train.sigma1)) {
    throw ConfigError("spreads must satisfy 0 < sigma1 <= sigma2");
  }
  if (!(cfg.train.learning_rate > 0.0) || cfg.train.max_epochs < 0 ||
      !(cfg.train.tol >= 0.0)) {
    throw ConfigError("invalid training settings");
  }
  if (cfg.train.pair_budget && *cfg.train.pair_budget == 0) {
    throw ConfigError("pair_budget must be positive");
  }
  if (!(cfg.prior.tol > 0.0) || cfg.prior.max_iter < 0) {
    throw ConfigError("invalid prior settings");
  }
  if (cfg.variants.empty()) throw ConfigError("no variants");
  std::set<std::string> names;
  for (const Variant& v : cfg.variants) {
    if (v.name.empty() || v.name.find_first_of("\t\n ") != std::string::npos) {
      throw ConfigError(fmt::format("invalid variant name '{}'", v.name));
    }
    if (!names.insert(v.name).second) {
      throw ConfigError(fmt::format("duplicate variant '{}'", v.name));
    }
    if (v.biased_eval() && !cfg.biased_eval) {
      throw ConfigError(fmt::format(
          "variant '{}' evaluates under the biased prior; set biased_eval = true",
          v.name));
    }
    const bool biased = !v.random && (v.train_prior == PriorChoice::kBiased ||
                                      v.eval_prior == PriorChoice::kBiased);
    if (biased && cfg.sensitive.empty()) {
      throw ConfigError(fmt::format(
          "variant '{}' needs a biased prior but no sensitive attributes are set",
          v.name));
    }
  }
  switch (cfg.source) {
    case DataSource::kFiles:
      if (cfg.edges.empty()) throw ConfigError("[data] edges is required");
      break;
    case DataSource::kMovieLens:
      if (cfg.movielens_dir.empty()) throw ConfigError("[data] movielens_dir is required");
      break;
    case DataSource::kSbm:
      break;
  }
}

AttributedGraph load_dataset(const ExperimentConfig& cfg) {
  switch (cfg.source) {
    case DataSource::kFiles:
      return load_graph(cfg.edges, cfg.attributes);
    case DataSource::kMovieLens:
      return load_movielens(cfg.movielens_dir);
    case DataSource::kSbm:
      try {
        return generate_sbm(cfg.sbm);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("[data] sbm: {}", e.what()));
      }
  }
  throw ConfigError("unknown data source");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const AttributedGraph& graph) {
  validate(cfg);
  for (const auto& names : {cfg.sensitive, cfg.metric_attributes}) {
    for (const auto& a : names) {
      if (!graph.schema().find(a)) {
        throw ConfigError(fmt::format("attribute '{}' is not in the dataset", a));
      }
    }
  }
  ExperimentReport report;
  report.config = cfg;
  report.nodes = graph.num_nodes();
  report.edges = graph.num_edges();

  std::vector<std::pair<std::size_t, GroupCells>> cells;
  for (const auto& a : cfg.metric_attributes) {
    const std::size_t k = *graph.schema().find(a);
    cells.emplace_back(k, GroupCells(graph.attribute_values(k),
                                     graph.schema()[k].values, graph.is_bipartite()));
  }
  ScoredPairs universe;
  if (cfg.dp_all_pairs) {
    graph.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
      universe.push_back({u, v, 0.0, graph.has_edge(u, v)});
    });
  }

  for (const std::uint64_t seed : cfg.seeds) {
    std::optional<TrainTestSplit> split;
    std::string split_error;
    try {
      split = split_edges(graph, cfg.test_fraction, seed);
    } catch (const std::exception& e) {
      split_error = e.what();
    }
    std::map<PriorChoice, PriorModel> priors;
    std::map<PriorChoice, std::string> prior_errors;
    std::map<PriorChoice, EmbeddingModel> embeddings;
    std::map<PriorChoice, std::string> train_errors;
    auto prior = [&](PriorChoice c) -> const PriorModel& {
      if (auto it = prior_errors.find(c); it != prior_errors.end()) {
        throw std::runtime_error(it->second);
      }
      if (auto it = priors.find(c); it != priors.end()) return it->second;
      try {
        const PriorSpec spec = c == PriorChoice::kBiased
                                   ? PriorSpec{PriorKind::kBiased, cfg.sensitive}
                                   : PriorSpec{PriorKind::kObliviousDegree, {}};
        auto model = fit_prior(split->train, spec, cfg.prior);
        report.priors[seed][to_string(c)] = model.diagnostics();
        return priors.emplace(c, std::move(model)).first->second;
      } catch (const std::exception& e) {
        prior_errors[c] = fmt::format("{} prior: {}", to_string(c), e.what());
        throw std::runtime_error(prior_errors[c]);
      }
    };
    auto embedding = [&](PriorChoice c) -> const EmbeddingModel& {
      if (auto it = train_errors.find(c); it != train_errors.end()) {
        throw std::runtime_error(it->second);
      }
      if (auto it = embeddings.find(c); it != embeddings.end()) return it->second;
      const PriorModel& p = prior(c);
      try {
        TrainConfig tc = cfg.train;
        tc.seed = seed;
        return embeddings.emplace(c, train(split->train, p, tc)).first->second;
      } catch (const std::exception& e) {
        train_errors[c] = fmt::format("training: {}", e.what());
        throw std::runtime_error(train_errors[c]);
      }
    };

    for (const Variant& variant : cfg.variants) {
      SeedResult run;
      run.variant = variant.name;
      run.seed = seed;
      try {
        if (!split) throw std::runtime_error("split: " + split_error);
        const ScoredPairs test =
            labelled_pairs(split->test_positives, split->test_negatives);
        ScoredPairs scored;
        ScoredPairs scored_universe;
        const EmbeddingModel* emb = nullptr;
        if (variant.random) {
          scored = random_scores(test, seed);
          if (cfg.dp_all_pairs) scored_universe = random_scores(universe, seed + 1);
        } else {
          emb = &embedding(variant.train_prior);
          run.training = emb->diagnostics;
          const PriorModel& eval = prior(variant.eval_prior);
          scored = predict_links(*emb, eval, test);
          if (cfg.dp_all_pairs) scored_universe = predict_links(*emb, eval, universe);
        }
        const ScoredPairs& parity_pairs = cfg.dp_all_pairs ? scored_universe : scored;
        MetricReport& m = run.report;
        m.auc = auc(scored);
        for (const auto& [k, groups] : cells) {
          const std::string& name = graph.schema()[k].name;
          m.dp[name] = demographic_parity(parity_pairs, groups);
          m.eo[name] = equalized_opportunity(scored, groups);
          m.arp[name] = acceptance_rate_parity(parity_pairs, groups, cfg.k_percent);
          if (emb) {
            RepresentationBiasOptions options;
            options.l2_grid = cfg.probe_grid;
            const Eigen::MatrixXd z = emb->z;
            m.rb[name] = representation_bias(z, graph.attribute_values(k),
                                             graph.schema()[k].values.size(),
                                             options, seed);
          }
        }
      } catch (const std::exception& e) {
        run.error = e.what();
      }
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

std::map<std::string, double> scalar_metrics(const MetricReport& report) {
  std::map<std::string, double> out;
  if (report.auc) out["auc"] = *report.auc;
  for (const auto& [a, r] : report.rb) out["rb_" + a] = r.value;
  for (const auto& [a, r] : report.dp) {
    if (r.value) out["dp_" + a] = *r.value;
  }
  for (const auto& [a, r] : report.eo) {
    if (r.value) out["eo_" + a] = *r.value;
  }
  for (const auto& [a, r] : report.arp) {
    if (r.value) out["arp_" + a] = *r.value;
  }
  return out;
}

namespace {

void write_config_header(std::ostream& out, const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  const char* source = c.source == DataSource::kFiles       ? "files"
                       : c.source == DataSource::kMovieLens ? "movielens"
                                                            : "sbm";
  fmt::print(out, "# nodes\t{}\n# edges\t{}\n# source\t{}\n", report.nodes,
             report.edges, source);
  fmt::print(out, "# sensitive\t{}\n# seeds\t{}\n", format_list(c.sensitive),
             format_numbers(c.seeds));
  fmt::print(out, "# test_fraction\t{}\n# k_percent\t{}\n# probe_grid\t{}\n",
             c.test_fraction, c.k_percent, format_numbers(c.probe_grid));
  fmt::print(out, "# dp_universe\t{}\n", c.dp_all_pairs ? "all" : "test");
  fmt::print(out, "# dims\t{}\n# sigma1\t{}\n# sigma2\t{}\n# learning_rate\t{}\n",
             c.train.dims, c.train.sigma1, c.train.sigma2, c.train.learning_rate);
  fmt::print(out, "# max_epochs\t{}\n# train_tol\t{}\n# pair_budget\t{}\n",
             c.train.max_epochs, c.train.tol,
             c.train.pair_budget ? fmt::format("{}", *c.train.pair_budget) : "none");
  fmt::print(out, "# prior_tol\t{}\n# prior_max_iter\t{}\n", c.prior.tol,
             c.prior.max_iter);
  if (c.source == DataSource::kMovieLens) {
    fmt::print(out, "# age_brackets\t{}\n", format_list(age_brackets()));
  }
  for (const Variant& v : c.variants) {
    if (v.random) {
      fmt::print(out, "# variant\t{}\tuniform random scores\n", v.name);
    } else {
      fmt::print(out, "# variant\t{}\ttrain={}\teval={}{}\n", v.name,
                 to_string(v.train_prior), to_string(v.eval_prior),
                 v.biased_eval() ? "\tbiased-eval quadrant" : "");
    }
  }
}

void write_table(std::ostream& out, const CellTable& t) {
  for (Eigen::Index a = 0; a < t.count.rows(); ++a) {
    for (Eigen::Index b = a; b < t.count.cols(); ++b) {
      if (t.count(a, b) == 0) {
        fmt::print(out, "cell\t{}\t{}\t0\t-\n", t.labels[a], t.labels[b]);
      } else {
        fmt::print(out, "cell\t{}\t{}\t{}\t{:.17g}\n", t.labels[a], t.labels[b],
                   t.count(a, b), t.rate(a, b));
      }
    }
  }
}

std::string optional_value(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : "absent";
}

}  // namespace

void write_metric_report(std::ostream& out, const MetricReport& m) {
  fmt::print(out, "auc\t{}\n", optional_value(m.auc));
  for (const auto& [a, r] : m.dp) {
    fmt::print(out, "[dp {}]\nvalue\t{}\n", a, optional_value(r.value));
    write_table(out, r.table);
  }
  for (const auto& [a, r] : m.eo) {
    fmt::print(out, "[eo {}]\nvalue\t{}\n", a, optional_value(r.value));
    write_table(out, r.table);
  }
  for (const auto& [a, r] : m.arp) {
    fmt::print(out, "[arp {}]\nvalue\t{}\nk_percent\t{}\naccepted\t{}\n", a,
               optional_value(r.value), r.k_percent, r.accepted);
    write_table(out, r.table);
  }
  for (const auto& [a, r] : m.rb) {
    fmt::print(out, "[rb {}]\nvalue\t{:.17g}\nl2\t{}\ntrain_nodes\t{}\ntest_nodes\t{}\n",
               a, r.value, r.l2, r.train_nodes, r.test_nodes);
    for (std::size_t c = 0; c < r.class_auc.size(); ++c) {
      fmt::print(out, "class\t{}\t{}\t{:.17g}\n", c,
                 std::isnan(r.class_auc[c]) ? std::string("excluded")
                                            : fmt::format("{:.17g}", r.class_auc[c]),
                 r.class_weight[c]);
    }
    for (const auto& d : r.diagnostics) fmt::print(out, "note\t{}\n", d);
  }
}

void write_summary(std::ostream& out, const ExperimentReport& report) {
  fmt::print(out, "# fairemb experiment summary\n");
  write_config_header(out, report);
  fmt::print(out, "variant\tmetric\tmean\tstd\tseeds\n");
  std::vector<std::string> order = {"auc"};
  for (const auto& a : report.config.metric_attributes) {
    for (const char* m : {"rb_", "dp_", "eo_", "arp_"}) order.push_back(m + a);
  }
  for (const Variant& v : report.config.variants) {
    std::map<std::string, std::vector<double>> values;
    for (const SeedResult& r : report.runs) {
      if (r.variant != v.name || r.error) continue;
      for (const auto& [k, x] : scalar_metrics(r.report)) values[k].push_back(x);
    }
    if (values.empty()) {
      fmt::print(out, "# variant {} produced no results\n", v.name);
      continue;
    }
    for (const auto& metric : order) {
      const auto it = values.find(metric);
      if (it == values.end()) continue;
      const auto& xs = it->second;
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      const double sd =
          xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
      fmt::print(out, "{}\t{}\t{:.10g}\t{:.10g}\t{}\n", v.name, metric, mean, sd,
                 xs.size());
    }
  }
}

void write_details(std::ostream& out, const ExperimentReport& report) {
  fmt::print(out, "# fairemb experiment details\n");
  write_config_header(out, report);
  for (const auto& [seed, fits] : report.priors) {
    for (const auto& [name, d] : fits) {
      fmt::print(out,
                 "prior\tseed={}\t{}\titerations={}\tconverged={}\tmax_residual={:.6g}\t"
                 "max_unsaturated_residual={:.6g}\tsaturated={}\tclamped={}\n",
                 seed, name, d.iterations, d.converged ? 1 : 0, d.max_residual,
                 d.max_unsaturated_residual, d.saturated, d.clamped);
    }
  }
  for (const SeedResult& r : report.runs) {
    fmt::print(out, "\n== {} seed {}\n", r.variant, r.seed);
    if (r.error) {
      fmt::print(out, "error\t{}\n", *r.error);
      continue;
    }
    if (r.training.epochs > 0) {
      fmt::print(out,
                 "training\tepochs={}\trejected={}\tconverged={}\tinitial={:.17g}\t"
                 "final={:.17g}\n",
                 r.training.epochs, r.training.rejected_steps,
                 r.training.converged ? 1 : 0, r.training.initial_objective,
                 r.training.final_objective);
    }
    write_metric_report(out, r.report);
  }
}

}  // namespace fairemb
