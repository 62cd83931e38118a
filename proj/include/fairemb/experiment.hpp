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


#ifndef FAIREMB_EXPERIMENT_HPP_
#define FAIREMB_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairemb/cne.hpp"
#include "fairemb/graph.hpp"
#include "fairemb/io.hpp"
#include "fairemb/metrics.hpp"
#include "fairemb/prior.hpp"

namespace fairemb {

// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PriorChoice { kOblivious, kBiased };

// One row group of the report. A random variant ignores the priors and
// scores pairs uniformly at random.
struct Variant {
  std::string name;
  PriorChoice train_prior = PriorChoice::kOblivious;
  PriorChoice eval_prior = PriorChoice::kOblivious;
  bool random = false;

  // Predicting under the biased prior re-injects what the embedding was
  // meant to drop; such variants need ExperimentConfig::biased_eval.
  bool biased_eval() const {
    return !random && eval_prior == PriorChoice::kBiased;
  }
};

// "CNE" (oblivious/oblivious), "DeBayes" (biased/oblivious), "Random", plus
// the two biased-evaluation quadrants when `biased_eval` is set.
std::vector<Variant> default_variants(bool biased_eval);

enum class DataSource { kFiles, kMovieLens, kSbm };

struct ExperimentConfig {
  DataSource source = DataSource::kSbm;
  std::filesystem::path edges;
  std::optional<std::filesystem::path> attributes;
  std::filesystem::path movielens_dir;
  SbmSpec sbm;

  // Attributes conditioned on by the biased prior.
  std::vector<std::string> sensitive;
  // Attributes DP/EO/ARP/RB are reported for; defaults to `sensitive`.
  std::vector<std::string> metric_attributes;
  std::vector<std::uint64_t> seeds = {0};
  double test_fraction = 0.2;
  double k_percent = 10.0;
  std::vector<double> probe_grid = {0.01, 0.1, 1.0, 10.0};
  // DP and ARP over the scored test pairs, or over every candidate pair.
  bool dp_all_pairs = false;
  bool biased_eval = false;

  TrainConfig train;
  FitOptions prior;
  std::vector<Variant> variants = default_variants(false);
};

// Flat INI text: [data], [experiment], [train], [prior] and one
// [variant.NAME] section per variant. Throws ConfigError on unknown keys,
// bad values or inconsistent settings.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
// Throws ConfigError.
void validate(const ExperimentConfig& cfg);

AttributedGraph load_dataset(const ExperimentConfig& cfg);

// Metrics of one variant on one seed.
struct SeedResult {
  std::string variant;
  std::uint64_t seed = 0;
  std::optional<std::string> error;
  MetricReport report;
  TrainDiagnostics training;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::vector<SeedResult> runs;
  // Per seed: prior fit diagnostics keyed "oblivious"/"biased".
  std::map<std::uint64_t, std::map<std::string, FitDiagnostics>> priors;
};

// Per seed: split, fit the priors on the training graph only, train one
// embedding per training prior, score the test pairs for every variant and
// compute AUC, RB, DP, EO and ARP. A failing stage is recorded on that run.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const AttributedGraph& graph);

// Scalar metrics of a run keyed "auc", "rb_<attr>", "dp_<attr>",
// "eo_<attr>", "arp_<attr>"; undefined ones are left out.
std::map<std::string, double> scalar_metrics(const MetricReport& report);

// Rows "variant<TAB>metric<TAB>mean<TAB>std<TAB>seeds" (sample std), after a
// '#' header describing the configuration.
void write_summary(std::ostream& out, const ExperimentReport& report);
// Every table, count and diagnostic behind the summary.
void write_details(std::ostream& out, const ExperimentReport& report);
void write_metric_report(std::ostream& out, const MetricReport& report);

}  // namespace fairemb

#endif  // FAIREMB_EXPERIMENT_HPP_
