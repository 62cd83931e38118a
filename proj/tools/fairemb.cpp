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


// fairemb: data splits, prior fitting, embedding training, link prediction,
// fairness evaluation and multi-seed experiments from the command line.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

#include "fairemb/cne.hpp"
#include "fairemb/errors.hpp"
#include "fairemb/experiment.hpp"
#include "fairemb/graph.hpp"
#include "fairemb/io.hpp"
#include "fairemb/metrics.hpp"
#include "fairemb/prior.hpp"

namespace fs = std::filesystem;
using namespace fairemb;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Where a subcommand reads its graph from.
struct GraphInput {
  std::string edges;
  std::string attr_file;
  std::string movielens;
  std::string split;

  void add_to(CLI::App* app) {
    auto* e = app->add_option("--edges", edges, "Edge list TSV");
    app->add_option("--attr-file", attr_file, "Node attributes TSV")->needs(e);
    auto* m = app->add_option("--movielens", movielens, "MovieLens-100k directory");
    auto* s = app->add_option("--split", split,
                              "Split directory; reads train.tsv and attrs.tsv");
    e->excludes(m)->excludes(s);
    m->excludes(s);
  }

  AttributedGraph load() const {
    if (!split.empty()) {
      return load_graph(fs::path(split) / "train.tsv", fs::path(split) / "attrs.tsv");
    }
    if (!movielens.empty()) return load_movielens(movielens);
    if (edges.empty()) {
      throw UsageError("one of --edges, --movielens or --split is required");
    }
    std::optional<fs::path> attrs;
    if (!attr_file.empty()) attrs = attr_file;
    return load_graph(edges, attrs);
  }
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  return out;
}

void print_fit(const FitDiagnostics& d) {
  fmt::print("iterations\t{}\nconverged\t{}\nmax_residual\t{:.3g}\n"
             "max_unsaturated_residual\t{:.3g}\nsaturated\t{}\nclamped\t{}\n",
             d.iterations, d.converged ? "yes" : "no", d.max_residual,
             d.max_unsaturated_residual, d.saturated, d.clamped);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Debiased network embeddings and link-prediction fairness audits"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  double k_percent = 10.0;
  int dims = 8;
  double sigma1 = 0.7;
  double sigma2 = 2.0;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::string out;

  // split
  auto* split_cmd = app.add_subcommand("split", "Hold out test edges and non-edges");
  GraphInput split_in;
  split_in.add_to(split_cmd);
  split_cmd->add_option("--seed", seed);
  split_cmd->add_option("--test-fraction", test_fraction)->capture_default_str();
  split_cmd->add_option("--out", out, "Output directory")->required();

  // generate-sbm
  auto* sbm_cmd = app.add_subcommand("generate-sbm", "Sample a stochastic block model");
  SbmSpec sbm;
  std::optional<std::size_t> left_nodes;
  sbm_cmd->add_option("--nodes", sbm.nodes)->capture_default_str();
  sbm_cmd->add_option("--proportions", sbm.proportions)->delimiter(',')
      ->capture_default_str();
  sbm_cmd->add_option("--p-in", sbm.p_in)->capture_default_str();
  sbm_cmd->add_option("--p-out", sbm.p_out)->capture_default_str();
  sbm_cmd->add_option("--left-nodes", left_nodes, "Make the graph bipartite");
  sbm_cmd->add_option("--seed", seed);
  sbm_cmd->add_option("--out", out, "Output directory")->required();

  // fit-prior
  auto* fit_cmd = app.add_subcommand("fit-prior", "Fit a maximum-entropy prior");
  GraphInput fit_in;
  fit_in.add_to(fit_cmd);
  std::string kind = "oblivious";
  std::vector<std::string> attrs;
  bool no_unattributed = false;
  fit_cmd->add_option("--kind", kind, "density, oblivious or biased")
      ->capture_default_str();
  fit_cmd->add_option("--attrs", attrs, "Attributes of a biased prior")->delimiter(',');
  fit_cmd->add_flag("--no-unattributed-term", no_unattributed,
                    "Drop the multiplier for partners lacking an attribute");
  fit_cmd->add_option("--tol", tol);
  fit_cmd->add_option("--max-iter", max_iter);
  fit_cmd->add_option("--out", out, "Prior file")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train an embedding against a prior");
  GraphInput train_in;
  train_in.add_to(train_cmd);
  std::string prior_path;
  double learning_rate = 0.1;
  std::optional<std::size_t> pair_budget;
  train_cmd->add_option("--prior", prior_path, "Prior file from fit-prior")->required();
  train_cmd->add_option("--dims", dims)->capture_default_str();
  train_cmd->add_option("--sigma1", sigma1)->capture_default_str();
  train_cmd->add_option("--sigma2", sigma2)->capture_default_str();
  train_cmd->add_option("--learning-rate", learning_rate)->capture_default_str();
  train_cmd->add_option("--pair-budget", pair_budget, "Subsample non-edges");
  train_cmd->add_option("--tol", tol);
  train_cmd->add_option("--max-iter", max_iter, "Maximum epochs");
  train_cmd->add_option("--seed", seed);
  train_cmd->add_option("--out", out, "Embeddings CSV")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Score node pairs");
  GraphInput predict_in;
  predict_in.add_to(predict_cmd);
  std::string embeddings_path, eval_prior_path, pairs_path;
  predict_cmd->add_option("--embeddings", embeddings_path)->required();
  predict_cmd->add_option("--eval-prior", eval_prior_path)->required();
  predict_cmd->add_option("--pairs", pairs_path,
                          "Pairs TSV; defaults to test.tsv of --split");
  predict_cmd->add_option("--sigma1", sigma1)->capture_default_str();
  predict_cmd->add_option("--sigma2", sigma2)->capture_default_str();
  predict_cmd->add_option("--out", out, "Scored pairs TSV")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Fairness and accuracy metrics");
  GraphInput eval_in;
  eval_in.add_to(eval_cmd);
  std::string scored_path;
  std::vector<double> probe_grid = {0.01, 0.1, 1.0, 10.0};
  eval_cmd->add_option("--scored", scored_path, "Scored pairs TSV")->required();
  eval_cmd->add_option("--embeddings", embeddings_path,
                       "Embeddings for representation bias");
  eval_cmd->add_option("--attrs", attrs, "Attributes to audit; default all")
      ->delimiter(',');
  eval_cmd->add_option("--k-percent", k_percent)->capture_default_str();
  eval_cmd->add_option("--probe-grid", probe_grid)->delimiter(',');
  eval_cmd->add_option("--seed", seed);
  eval_cmd->add_option("--out", out, "Report file; default stdout");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a multi-seed experiment");
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  run_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seeds, "Override the configured seeds");
  run_cmd->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*split_cmd) {
      const auto graph = split_in.load();
      const auto split = split_edges(graph, test_fraction, seed);
      write_split(out, split);
      fmt::print("train_edges\t{}\ntest_pairs\t{}\n", split.train.num_edges(),
                 split.test_positives.size() + split.test_negatives.size());
    } else if (*sbm_cmd) {
      sbm.seed = seed;
      sbm.left_nodes = left_nodes;
      const auto graph = generate_sbm(sbm);
      fs::create_directories(out);
      write_edge_tsv(fs::path(out) / "edges.tsv", graph);
      write_attr_tsv(fs::path(out) / "attrs.tsv", graph);
      fmt::print("nodes\t{}\nedges\t{}\n", graph.num_nodes(), graph.num_edges());
    } else if (*fit_cmd) {
      const auto graph = fit_in.load();
      PriorSpec spec;
      spec.kind = parse_prior_kind(kind);
      spec.attributes = attrs;
      spec.include_unattributed_degree_term = !no_unattributed;
      if (spec.kind == PriorKind::kBiased && attrs.empty()) {
        throw UsageError("--kind biased needs --attrs");
      }
      FitOptions options;
      if (tol) options.tol = *tol;
      if (max_iter) options.max_iter = *max_iter;
      const auto prior = fit_prior(graph, spec, options);
      write_prior(out, prior, graph);
      print_fit(prior.diagnostics());
      if (!prior.diagnostics().converged) {
        fmt::print(stderr, "prior fit did not converge\n");
        return 3;
      }
    } else if (*train_cmd) {
      const auto graph = train_in.load();
      const auto prior = read_prior(prior_path, graph);
      TrainConfig cfg;
      cfg.dims = dims;
      cfg.sigma1 = sigma1;
      cfg.sigma2 = sigma2;
      cfg.learning_rate = learning_rate;
      cfg.pair_budget = pair_budget;
      cfg.seed = seed;
      if (tol) cfg.tol = *tol;
      if (max_iter) cfg.max_epochs = *max_iter;
      const auto emb = train(graph, prior, cfg);
      write_embeddings(out, emb);
      const auto& d = emb.diagnostics;
      fmt::print("epochs\t{}\nrejected_steps\t{}\nconverged\t{}\n"
                 "initial_objective\t{:.10g}\nfinal_objective\t{:.10g}\n",
                 d.epochs, d.rejected_steps, d.converged ? "yes" : "no",
                 d.initial_objective, d.final_objective);
    } else if (*predict_cmd) {
      const auto graph = predict_in.load();
      auto emb = align_embeddings(read_embeddings(embeddings_path), graph);
      emb.sigma1 = sigma1;
      emb.sigma2 = sigma2;
      const auto prior = read_prior(eval_prior_path, graph);
      if (pairs_path.empty()) {
        if (predict_in.split.empty()) throw UsageError("--pairs is required");
        pairs_path = (fs::path(predict_in.split) / "test.tsv").string();
      }
      const auto pairs = read_scored_pairs(pairs_path, graph);
      write_scored_pairs(out, predict_links(emb, prior, pairs), graph);
    } else if (*eval_cmd) {
      const auto graph = eval_in.load();
      const auto scored = read_scored_pairs(scored_path, graph);
      if (attrs.empty()) {
        for (const auto& a : graph.schema().attributes()) attrs.push_back(a.name);
      }
      std::optional<EmbeddingModel> emb;
      if (!embeddings_path.empty()) {
        emb = align_embeddings(read_embeddings(embeddings_path), graph);
      }
      MetricReport report;
      bool labelled = false;
      for (const auto& p : scored) labelled = labelled || p.label.has_value();
      if (labelled) report.auc = auc(scored);
      for (const auto& name : attrs) {
        const auto k = graph.schema().find(name);
        if (!k) throw UsageError(fmt::format("unknown attribute '{}'", name));
        const GroupCells cells(graph.attribute_values(*k), graph.schema()[*k].values,
                               graph.is_bipartite());
        report.dp[name] = demographic_parity(scored, cells);
        if (labelled) report.eo[name] = equalized_opportunity(scored, cells);
        report.arp[name] = acceptance_rate_parity(scored, cells, k_percent);
        if (emb) {
          RepresentationBiasOptions options;
          options.l2_grid = probe_grid;
          const Eigen::MatrixXd z = emb->z;
          report.rb[name] = representation_bias(z, graph.attribute_values(*k),
                                                graph.schema()[*k].values.size(),
                                                options, seed);
        }
      }
      if (out.empty()) {
        write_metric_report(std::cout, report);
      } else {
        auto file = open_out(out);
        write_metric_report(file, report);
      }
    } else if (*run_cmd) {
      auto cfg = load_config(config_path);
      if (!seeds.empty()) {
        cfg.seeds = seeds;
        validate(cfg);
      }
      const auto graph = load_dataset(cfg);
      const auto report = run_experiment(cfg, graph);
      fs::create_directories(out);
      {
        auto file = open_out(fs::path(out) / "summary.tsv");
        write_summary(file, report);
      }
      {
        auto file = open_out(fs::path(out) / "details.txt");
        write_details(file, report);
      }
      write_summary(std::cout, report);
      std::size_t failed = 0;
      for (const auto& r : report.runs) failed += r.error ? 1 : 0;
      if (failed == report.runs.size()) return 3;
    }
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    // DataError, missing files, unknown node ids.
    fmt::print(stderr, "data error: {}\n", e.what());
    return 2;
  }
  return 0;
}
