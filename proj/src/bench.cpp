#include "falsify/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace falsify::bench {

void ExperimentConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  search.budget.validate();
  search.model.validate();
  suts::make_sut(sut);  // throws on unknown name
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty range");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<search::RunRecord> run_replications(const ExperimentConfig& cfg) {
  cfg.validate();
  const int reps = cfg.replications;
  std::vector<search::RunRecord> records(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (int i = next.fetch_add(1); i < reps; i = next.fetch_add(1)) {
      try {
        auto sut = suts::make_sut(cfg.sut);
        records[static_cast<std::size_t>(i)] =
            search::falsify(cfg.algorithm, *sut, cfg.search,
                            cfg.master_seed + static_cast<std::uint64_t>(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = std::min(cfg.jobs, reps);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

SummaryStats summarize(const std::vector<search::RunRecord>& records, int budget) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one record");
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");

  SummaryStats stats;
  stats.replications = static_cast<int>(records.size());
  std::vector<double> minima;
  minima.reserve(records.size());
  stats.mean_running_minimum.assign(static_cast<std::size_t>(budget), 0.0);

  for (const auto& record : records) {
    if (record.rows.empty()) throw std::invalid_argument("record without executions");
    minima.push_back(record.observed_minimum());
    if (record.termination == search::Termination::falsified) ++stats.falsifications;
    stats.executions_to_falsification.push_back(record.executions_to_falsification());

    double running = std::numeric_limits<double>::infinity();
    for (int k = 0; k < budget; ++k) {
      if (k < static_cast<int>(record.rows.size())) {
        const auto& rob = record.rows[static_cast<std::size_t>(k)].robustness;
        running = std::min(running, *std::min_element(rob.begin(), rob.end()));
      }
      stats.mean_running_minimum[static_cast<std::size_t>(k)] += running;
    }
  }
  for (double& v : stats.mean_running_minimum)
    v /= static_cast<double>(records.size());

  stats.rate = static_cast<double>(stats.falsifications) /
               static_cast<double>(stats.replications);
  stats.median_observed_minimum = median(minima);
  double mean = 0.0;
  for (double v : minima) mean += v;
  mean /= static_cast<double>(minima.size());
  stats.mean_observed_minimum = mean;
  if (minima.size() > 1) {
    double ss = 0.0;
    for (double v : minima) ss += (v - mean) * (v - mean);
    stats.sd_observed_minimum = std::sqrt(ss / static_cast<double>(minima.size() - 1));
  }
  return stats;
}

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_runs_csv(std::ostream& out, const std::vector<search::RunRecord>& records) {
  if (records.empty() || records.front().rows.empty())
    throw std::invalid_argument("no executions to write");
  const std::size_t dim = records.front().rows.front().test.coords.size();
  const std::size_t n_req = records.front().rows.front().robustness.size();

  out << "replication,index,source";
  for (std::size_t j = 0; j < dim; ++j) out << ",t" << j;
  for (std::size_t j = 0; j < n_req; ++j) out << ",rho" << j;
  out << ",running_min\n";

  for (std::size_t rep = 0; rep < records.size(); ++rep) {
    double running = std::numeric_limits<double>::infinity();
    const auto& rows = records[rep].rows;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& row = rows[k];
      out << rep << ',' << k << ',';
      if (row.source == search::Source::lhs) {
        out << "lhs";
      } else {
        out << "gan" << row.model_index;
      }
      for (double c : row.test.coords) out << ',' << format_number(c);
      for (double r : row.robustness) out << ',' << format_number(r);
      running = std::min(running, *std::min_element(row.robustness.begin(),
                                                    row.robustness.end()));
      out << ',' << format_number(running) << '\n';
    }
  }
}

nlohmann::json summary_to_json(const SummaryStats& stats) {
  nlohmann::json executions = nlohmann::json::array();
  for (const auto& e : stats.executions_to_falsification) {
    if (e) {
      executions.push_back(*e);
    } else {
      executions.push_back(nullptr);
    }
  }
  nlohmann::json j{{"replications", stats.replications},
                   {"falsifications", stats.falsifications},
                   {"rate", stats.rate},
                   {"median_observed_minimum", stats.median_observed_minimum},
                   {"mean_observed_minimum", stats.mean_observed_minimum},
                   {"executions_to_falsification", executions},
                   {"mean_running_minimum", stats.mean_running_minimum}};
  if (stats.sd_observed_minimum) {
    j["sd_observed_minimum"] = *stats.sd_observed_minimum;
  } else {
    j["sd_observed_minimum"] = nullptr;
  }
  return j;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  const auto& b = cfg.search.budget;
  const auto& m = cfg.search.model;
  auto train = [](const nets::TrainConfig& t) {
    return nlohmann::json{{"learning_rate", t.learning_rate},
                          {"epochs", t.epochs},
                          {"batch_size", t.batch_size},
                          {"beta1", t.beta1},
                          {"beta2", t.beta2},
                          {"epsilon", t.epsilon}};
  };
  return {{"algorithm", search::algorithm_name(cfg.algorithm)},
          {"sut", cfg.sut},
          {"replications", cfg.replications},
          {"master_seed", cfg.master_seed},
          {"jobs", cfg.jobs},
          {"budget",
           {{"budget", b.budget},
            {"lhs_fraction", b.lhs_fraction},
            {"delta", b.delta},
            {"warmup_fraction", b.warmup_fraction}}},
          {"model",
           {{"latent_dim", m.latent_dim},
            {"generator_hidden", m.generator_hidden},
            {"discriminator_hidden", m.discriminator_hidden},
            {"generator_batch", m.generator_batch},
            {"discriminator_train", train(m.discriminator_train)},
            {"generator_train", train(m.generator_train)}}}};
}

SummaryStats run_experiment(const ExperimentConfig& cfg) {
  std::vector<search::RunRecord> records = run_replications(cfg);
  SummaryStats stats = summarize(records, cfg.search.budget.budget);

  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ofstream csv(cfg.out_dir / "runs.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + (cfg.out_dir / "runs.csv").string());
    write_runs_csv(csv, records);
  }
  {
    std::ofstream out(cfg.out_dir / "summary.json", std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + (cfg.out_dir / "summary.json").string());
    out << summary_to_json(stats).dump(2) << '\n';
  }
  {
    std::ofstream out(cfg.out_dir / "config.json", std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + (cfg.out_dir / "config.json").string());
    out << config_to_json(cfg).dump(2) << '\n';
  }
  return stats;
}

}  // namespace falsify::bench
