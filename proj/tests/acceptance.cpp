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


// Acceptance checks. Prints one "criterion N: PASS|FAIL ..." line per
// criterion; `acceptance N` runs a single one. Exit status is nonzero when
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "fairemb/cne.hpp"
#include "fairemb/experiment.hpp"
#include "fairemb/io.hpp"
#include "fairemb/metrics.hpp"
#include "fairemb/prior.hpp"
#include "metric_oracles.hpp"
#include "test_util.hpp"

namespace fairemb {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("violated: " + what);
    }
  }
  void note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

double dual_gradient_error(const PriorDual& dual, const Eigen::VectorXd& theta,
                           std::mt19937_64& rng) {
  const double h = 1e-5;
  const Eigen::VectorXd g = dual.gradient(theta);
  const auto n = theta.size();
  // Every coordinate on small layouts, a random sample of 40 otherwise.
  std::vector<Eigen::Index> coords(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
  if (n > 40) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(40);
  }
  Eigen::VectorXd fd(static_cast<Eigen::Index>(coords.size()));
  Eigen::VectorXd an(fd.size());
  Eigen::VectorXd t = theta;
  for (std::size_t j = 0; j < coords.size(); ++j) {
    const Eigen::Index i = coords[j];
    t(i) = theta(i) + h;
    const double up = dual.objective(t);
    t(i) = theta(i) - h;
    const double down = dual.objective(t);
    t(i) = theta(i);
    fd(static_cast<Eigen::Index>(j)) = (up - down) / (2 * h);
    an(static_cast<Eigen::Index>(j)) = g(i);
  }
  return (fd - an).norm() / std::max(an.norm(), 1e-12);
}

Outcome prior_correctness() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  double worst_residual = 0.0;
  double worst_gradient = 0.0;
  int fits = 0;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  const int sizes[] = {20, 60, 120, 200};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = sizes[seed % 4];
    const double degree = 3.0 + static_cast<double>(seed % 5) * 2.0;
    testing::RandomGraphSpec spec{n, std::min(0.5, degree / n), {3, 2},
                                  seed % 2 == 0 ? 0.2 : 0.0, seed % 3 == 2};
    const auto g = testing::random_graph(spec, seed);
    for (const PriorSpec& kind :
         {PriorSpec{PriorKind::kDensity, {}}, PriorSpec{PriorKind::kObliviousDegree, {}},
          PriorSpec{PriorKind::kBiased, {"a0", "a1"}}}) {
      const auto model = fit_prior(g, kind);
      const auto report = constraint_residuals(model, g);
      worst_residual = std::max(worst_residual, report.max_unsaturated);
      ++fits;
      PriorDual dual(g, PriorLayout(g, kind));
      Eigen::VectorXd theta(dual.layout().size());
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = 0.5 * normal(rng);
      worst_gradient = std::max(worst_gradient, dual_gradient_error(dual, theta, rng));
    }
  }
  const double elapsed = seconds_since(start);
  out.require(worst_residual <= 1e-6, "unsaturated residual <= 1e-6");
  out.require(worst_gradient <= 1e-5, "dual gradient rel. error <= 1e-5");
  out.require(elapsed < 30.0, "runtime < 30 s");
  out.note(fmt::format("{} fits, max unsaturated residual {:.2e}, max gradient "
                       "rel. error {:.2e}, {:.1f} s",
                       fits, worst_residual, worst_gradient, elapsed));
  return out;
}

Outcome prior_reduction() {
  Outcome out;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    testing::RandomGraphSpec spec{40, 0.15, {1}, 0.0, seed % 2 == 1};
    const auto g = testing::random_graph(spec, seed);
    const auto oblivious = fit_prior(g, {PriorKind::kObliviousDegree, {}});
    const auto biased = fit_prior(g, {PriorKind::kBiased, {"a0"}});
    g.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
      worst = std::max(worst, std::abs(biased.prob(u, v) - oblivious.prob(u, v)));
    });
  }
  out.require(worst <= 1e-9, "pairwise |biased - oblivious| <= 1e-9");
  out.note(fmt::format("6 graphs, max pairwise difference {:.2e}", worst));
  return out;
}

Outcome posterior_identities() {
  Outcome out;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = testing::random_graph({30, 0.2, {2}, 0.1, false}, seed);
    const auto prior = fit_prior(g, {PriorKind::kBiased, {"a0"}});
    EmbeddingModel emb;
    emb.nodes = g.ids();
    emb.z = initial_embedding(g.num_nodes(), 4, seed) * 3.0;
    emb.sigma1 = emb.sigma2 = 0.5 + 0.3 * static_cast<double>(seed);
    g.for_each_candidate_pair([&](NodeIndex u, NodeIndex v) {
      worst = std::max(worst,
                       std::abs(posterior_prob(emb, prior, u, v) - prior.prob(u, v)));
    });
  }
  const double logit = posterior_logit(0.0, 0.0, 0.7, 1.4);
  const double p = 1.0 / (1.0 + std::exp(-logit));
  out.require(worst <= 1e-12, "equal spreads give the prior within 1e-12");
  out.require(std::abs(p - 2.0 / 3.0) <= 1e-12, "worked value 2/3");
  out.note(fmt::format("max |posterior - prior| {:.2e}, worked value {:.17g}", worst, p));
  return out;
}

Outcome gradient_suite() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  const double h = 1e-5;
  int checked = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; checked < 24 && seed < 200; ++seed) {
    const int n = 4 + static_cast<int>(seed % 7);
    const int d = 1 + static_cast<int>(seed % 4);
    const auto g = testing::random_graph({n, 0.4, {2}, 0.2, seed % 4 == 3}, seed);
    const PriorSpec spec = seed % 3 == 0   ? PriorSpec{PriorKind::kDensity, {}}
                           : seed % 3 == 1 ? PriorSpec{PriorKind::kObliviousDegree, {}}
                                           : PriorSpec{PriorKind::kBiased, {"a0"}};
    const auto prior = fit_prior(g, spec);
    const double s1 = 0.5 + 0.05 * static_cast<double>(seed % 5);
    const double s2 = 1.5 + 0.1 * static_cast<double>(seed % 3);
    EmbeddingObjective objective(g, prior, s1, s2);
    Embedding z = initial_embedding(g.num_nodes(), d, seed + 100);
    Embedding analytic;
    objective.evaluate(z, analytic);
    // A prior that pins every pair leaves no gradient to compare.
    if (analytic.norm() < 1e-6) continue;
    Embedding numeric(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double keep = z.data()[i];
      z.data()[i] = keep + h;
      const double up = objective.value(z);
      z.data()[i] = keep - h;
      const double down = objective.value(z);
      z.data()[i] = keep;
      numeric.data()[i] = (up - down) / (2 * h);
    }
    worst = std::max(worst, (analytic - numeric).norm() / numeric.norm());
    ++checked;
  }
  const double elapsed = seconds_since(start);
  out.require(checked >= 20, ">= 20 instances");
  out.require(worst <= 1e-4, "rel. error <= 1e-4");
  out.require(elapsed < 10.0, "runtime < 10 s");
  out.note(fmt::format("{} instances (n <= 10, d <= 4), max rel. error {:.2e}, {:.2f} s",
                       checked, worst, elapsed));
  return out;
}

Outcome cne_equivalence() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.sbm.nodes = 80;
  cfg.sbm.p_in = 0.2;
  cfg.sbm.p_out = 0.02;
  cfg.sbm.seed = 4;
  cfg.sensitive = cfg.metric_attributes = {"group"};
  cfg.seeds = {3};
  cfg.train.max_epochs = 80;
  cfg.variants = {{"CNE", PriorChoice::kOblivious, PriorChoice::kOblivious, false},
                  {"DeBayes", PriorChoice::kBiased, PriorChoice::kOblivious, false}};
  const auto graph = load_dataset(cfg);
  const auto report = run_experiment(cfg, graph);

  // The same pipeline by hand: one training routine and one prediction
  // routine, with only the training prior swapped.
  const auto split = split_edges(graph, cfg.test_fraction, 3);
  const auto oblivious = fit_prior(split.train, {PriorKind::kObliviousDegree, {}});
  const auto biased = fit_prior(split.train, {PriorKind::kBiased, {"group"}});
  TrainConfig tc = cfg.train;
  tc.seed = 3;
  const auto test = labelled_pairs(split.test_positives, split.test_negatives);
  const auto cne = predict_links(train(split.train, oblivious, tc), oblivious, test);
  const auto debayes = predict_links(train(split.train, biased, tc), oblivious, test);
  for (const auto& run : report.runs) {
    if (run.error) {
      out.require(false, run.variant + " failed: " + *run.error);
      continue;
    }
    const double expected = auc(run.variant == "CNE" ? cne : debayes);
    out.require(*run.report.auc == expected, run.variant + " AUC reproduced bitwise");
  }

  // Scores go through the single posterior routine.
  const auto emb = train(split.train, biased, tc);
  bool same = true;
  for (const auto& p : predict_links(emb, oblivious, test)) {
    same = same && p.score == posterior_prob(emb, oblivious, p.u, p.v);
  }
  out.require(same, "predict_links equals posterior_prob bitwise");

  // Coinciding priors (single-valued attribute) give the same scores.
  auto flat = testing::random_graph({60, 0.1, {1}, 0.0, false}, 8);
  const auto flat_split = split_edges(flat, 0.2, 1);
  const auto p_obl = fit_prior(flat_split.train, {PriorKind::kObliviousDegree, {}});
  const auto p_bia = fit_prior(flat_split.train, {PriorKind::kBiased, {"a0"}});
  const auto flat_test =
      labelled_pairs(flat_split.test_positives, flat_split.test_negatives);
  const auto a = predict_links(train(flat_split.train, p_obl, tc), p_obl, flat_test);
  const auto b = predict_links(train(flat_split.train, p_bia, tc), p_obl, flat_test);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i].score - b[i].score));
  }
  out.require(worst <= 1e-6, "coinciding priors give identical scores (1e-6)");
  out.note(fmt::format("experiment AUCs reproduced; coinciding-prior score gap {:.2e}",
                       worst));
  return out;
}

Outcome metric_oracles() {
  using namespace testing;
  Outcome out;
  int mismatches = 0;
  int instances = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const Instance in = random_instance(seed);
    if (in.pairs.size() > 200) continue;
    ++instances;
    const GroupCells cells(in.groups, names(in.values));
    mismatches += auc(in.pairs) != brute_auc(in.pairs);
    mismatches += demographic_parity(in.pairs, cells).value !=
                  brute_gap(brute_rates(in.pairs, in.groups, in.values, false));
    mismatches += equalized_opportunity(in.pairs, cells).value !=
                  brute_gap(brute_rates(in.pairs, in.groups, in.values, true));
    for (double k : {1.0, 10.0, 33.0, 50.0}) {
      mismatches += acceptance_rate_parity(in.pairs, cells, k).value !=
                    brute_arp(in.pairs, in.groups, in.values, k);
    }
    // Constant, perfect and accept-everything predictors.
    ScoredPairs constant = in.pairs;
    for (auto& p : constant) p.score = 0.1 * static_cast<double>(seed % 7) + 0.05;
    ScoredPairs perfect = in.pairs;
    for (auto& p : perfect) p.score = *p.label ? 1.0 : 0.0;
    const auto dp = demographic_parity(constant, cells).value;
    const auto eo = equalized_opportunity(perfect, cells).value;
    const auto arp = acceptance_rate_parity(in.pairs, cells, 100.0).value;
    out.require(!dp || *dp == 0.0, fmt::format("constant predictor DP = 0 (seed {})", seed));
    out.require(!eo || *eo == 0.0, fmt::format("perfect predictor EO = 0 (seed {})", seed));
    out.require(!arp || *arp == 0.0, fmt::format("k = 100 gives ARP = 0 (seed {})", seed));
  }
  out.require(instances >= 100, ">= 100 instances");
  out.require(mismatches == 0, "exact agreement with brute force");
  out.note(fmt::format("{} instances, {} mismatches", instances, mismatches));
  return out;
}

struct VariantMeans {
  double auc = 0.0, rb = 0.0, rb_max = 0.0, dp = 0.0;
  int runs = 0;
};

VariantMeans means(const ExperimentReport& report, const std::string& variant,
                   const std::string& attr) {
  VariantMeans m;
  for (const auto& r : report.runs) {
    if (r.variant != variant || r.error) continue;
    const auto s = scalar_metrics(r.report);
    m.auc += s.at("auc");
    m.rb += s.at("rb_" + attr);
    m.rb_max = std::max(m.rb_max, s.at("rb_" + attr));
    m.dp += s.count("dp_" + attr) ? s.at("dp_" + attr) : 0.0;
    ++m.runs;
  }
  if (m.runs > 0) {
    m.auc /= m.runs;
    m.rb /= m.runs;
    m.dp /= m.runs;
  }
  return m;
}

ExperimentConfig sbm_benchmark() {
  ExperimentConfig cfg;
  cfg.source = DataSource::kSbm;
  cfg.sbm = SbmSpec{};  // 300 nodes, two equal groups, 0.05 / 0.005, seed 0
  cfg.sensitive = cfg.metric_attributes = {"group"};
  cfg.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  cfg.train.dims = 8;
  cfg.train.sigma1 = 0.7;
  cfg.variants = default_variants(false);
  cfg.variants.pop_back();  // no random baseline
  return cfg;
}

Outcome synthetic_debiasing() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  const auto cfg = sbm_benchmark();
  const auto report = run_experiment(cfg, load_dataset(cfg));
  const auto cne = means(report, "CNE", "group");
  const auto debayes = means(report, "DeBayes", "group");
  const double elapsed = seconds_since(start);
  out.require(cne.runs == 10 && debayes.runs == 10, "all 10 seeds ran");
  out.require(cne.rb >= 0.80, "CNE mean RB >= 0.80");
  out.require(debayes.rb <= 0.65, "DeBayes mean RB <= 0.65");
  out.require(debayes.dp <= 0.6 * cne.dp, "DeBayes mean DP <= 0.6 x CNE mean DP");
  out.require(cne.auc - debayes.auc <= 0.10, "mean AUC drop <= 0.10");
  out.require(elapsed < 300.0, "runtime < 5 min");
  out.note(fmt::format("RB CNE {:.3f} DeBayes {:.3f}; DP CNE {:.4f} DeBayes {:.4f} "
                       "(ratio {:.2f}); AUC CNE {:.3f} DeBayes {:.3f} (drop {:.3f}); "
                       "{:.1f} s",
                       cne.rb, debayes.rb, cne.dp, debayes.dp, debayes.dp / cne.dp,
                       cne.auc, debayes.auc, cne.auc - debayes.auc, elapsed));
  return out;
}

std::string movielens_dir() {
  if (const char* env = std::getenv("FAIREMB_ML100K")) return env;
#ifdef FAIREMB_ML100K_DEFAULT
  return FAIREMB_ML100K_DEFAULT;
#else
  return "data/ml-100k";
#endif
}

Outcome movielens_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  ExperimentConfig cfg;
  cfg.source = DataSource::kMovieLens;
  cfg.movielens_dir = movielens_dir();
  cfg.sensitive = {"gender", "age", "occupation"};
  cfg.metric_attributes = {"gender"};
  cfg.seeds = {0, 1, 2};
  cfg.variants = default_variants(false);
  cfg.variants.pop_back();
  AttributedGraph graph;
  try {
    graph = load_dataset(cfg);
  } catch (const std::exception& e) {
    out.require(false, fmt::format("MovieLens-100k at {} ({})",
                                   cfg.movielens_dir.string(), e.what()));
    return out;
  }
  out.require(graph.num_nodes() == 2625, "|V| = 2625");
  out.require(graph.num_edges() == 100000, "|E| = 100000");
  const auto report = run_experiment(cfg, graph);
  const auto cne = means(report, "CNE", "gender");
  const auto debayes = means(report, "DeBayes", "gender");
  const double elapsed = seconds_since(start);
  out.require(cne.runs == 3 && debayes.runs == 3, "all 3 seeds ran");
  out.require(debayes.rb <= 0.60, "DeBayes mean RB_gender <= 0.60");
  out.require(debayes.auc >= cne.auc - 0.05, "AUC(DeBayes) >= AUC(CNE) - 0.05");
  out.require(elapsed < 45 * 60.0, "runtime < 45 min");
  out.note(fmt::format("|V| {} |E| {}; RB_gender CNE {:.3f} DeBayes {:.3f} (max {:.3f}); "
                       "AUC CNE {:.4f} DeBayes {:.4f}; {:.0f} s",
                       graph.num_nodes(), graph.num_edges(), cne.rb, debayes.rb,
                       debayes.rb_max, cne.auc, debayes.auc, elapsed));
  return out;
}

Outcome determinism() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.sbm.nodes = 120;
  cfg.sbm.p_in = 0.1;
  cfg.sbm.p_out = 0.01;
  cfg.sbm.seed = 2;
  cfg.sensitive = cfg.metric_attributes = {"group"};
  cfg.seeds = {0, 1};
  cfg.biased_eval = true;
  cfg.dp_all_pairs = true;
  cfg.variants = default_variants(true);
  auto render = [&] {
    const auto report = run_experiment(cfg, load_dataset(cfg));
    std::ostringstream text;
    write_summary(text, report);
    write_details(text, report);
    return text.str();
  };
  const std::string first = render();
  const std::string second = render();
  out.require(first == second, "byte-identical reports");
  out.note(fmt::format("two runs, {} report bytes each, 5 variants x 2 seeds",
                       first.size()));
  return out;
}

}  // namespace
}  // namespace fairemb

int main(int argc, char** argv) {
  using namespace fairemb;
  const std::vector<std::function<Outcome()>> criteria = {
      prior_correctness, prior_reduction,   posterior_identities,
      gradient_suite,    cne_equivalence,   metric_oracles,
      synthetic_debiasing, movielens_reproduction, determinism};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= 9; ++i) selected.push_back(i);
  }
  bool all = true;
  for (int n : selected) {
    if (n < 1 || n > 9) {
      fmt::print(stderr, "unknown criterion {}\n", n);
      return 2;
    }
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    fmt::print("criterion {}: {} {}\n", n, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
