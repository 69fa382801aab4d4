#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "falsify/search.hpp"
#include "json.hpp"

namespace falsify::bench {

struct ExperimentConfig {
  search::Algorithm algorithm = search::Algorithm::mab;
  std::string sut = "mo3d";
  int replications = 50;
  search::SearchConfig search{};
  std::uint64_t master_seed = 0;
  int jobs = 1;
  std::filesystem::path out_dir;

  void validate() const;
};

struct SummaryStats {
  int replications = 0;
  int falsifications = 0;
  double rate = 0.0;
  // Statistics of the per-replication observed minimum (raw scale).
  double median_observed_minimum = 0.0;
  double mean_observed_minimum = 0.0;
  std::optional<double> sd_observed_minimum;  // unbiased; null for R = 1
  std::vector<std::optional<int>> executions_to_falsification;  // per replication
  // Evolution curve: mean over replications of the running minimum at each
  // evaluation index (last value carried forward for early stops).
  std::vector<double> mean_running_minimum;  // length = budget
};

// Median with the midpoint-of-two convention for even counts.
double median(std::vector<double> values);

// Runs replications seeded master_seed + 0 .. master_seed + R - 1, in a
// worker pool of cfg.jobs threads. Results are ordered by replication
// index, so the output is independent of the job count.
std::vector<search::RunRecord> run_replications(const ExperimentConfig& cfg);

SummaryStats summarize(const std::vector<search::RunRecord>& records, int budget);

// One row per execution: replication, index, source, test coordinates, raw
// robustness components, running minimum. '.' decimal, 17 significant
// digits, Unix newlines.
void write_runs_csv(std::ostream& out, const std::vector<search::RunRecord>& records);

nlohmann::json summary_to_json(const SummaryStats& stats);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Full experiment: runs the replications and writes runs.csv, summary.json
// and config.json into cfg.out_dir. Deterministic for a fixed config.
SummaryStats run_experiment(const ExperimentConfig& cfg);

}  // namespace falsify::bench
