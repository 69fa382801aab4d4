#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "falsify/bench.hpp"

using falsify::bench::ExperimentConfig;

int main(int argc, char** argv) {
  CLI::App app{
      "Robustness-guided falsification benchmark runner: searches for inputs "
      "violating the selected SUT's requirements and writes per-replication "
      "results (runs.csv, summary.json, config.json)."};

  ExperimentConfig cfg;
  std::string algorithm = "mab";
  std::string out_dir;

  app.add_option("--algorithm", algorithm, "single | multi | mab")
      ->check(CLI::IsMember({"single", "multi", "mab"}))
      ->capture_default_str();
  app.add_option("--sut", cfg.sut, "registered SUT name")
      ->check(CLI::IsMember(falsify::suts::registered_suts()))
      ->capture_default_str();
  app.add_option("--budget", cfg.search.budget.budget, "SUT executions per replication")
      ->capture_default_str();
  app.add_option("--lhs-fraction", cfg.search.budget.lhs_fraction,
                 "budget share for Latin hypercube sampling")
      ->capture_default_str();
  app.add_option("--delta", cfg.search.budget.delta, "target escalation increment")
      ->capture_default_str();
  app.add_option("--warmup-fraction", cfg.search.budget.warmup_fraction,
                 "budget share before requirement selection (mab only)")
      ->capture_default_str();
  app.add_option("--reps", cfg.replications, "number of replications")
      ->capture_default_str();
  app.add_option("--seed", cfg.master_seed,
                 "master seed; replication i uses seed + i")
      ->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "worker threads over replications")
      ->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->required();

  app.add_option("--latent-dim", cfg.search.model.latent_dim, "generator latent dimension")
      ->capture_default_str();
  app.add_option("--gen-hidden", cfg.search.model.generator_hidden,
                 "generator hidden layer sizes");
  app.add_option("--disc-hidden", cfg.search.model.discriminator_hidden,
                 "discriminator hidden layer sizes");
  app.add_option("--disc-epochs", cfg.search.model.discriminator_train.epochs,
                 "discriminator epochs per outer step")
      ->capture_default_str();
  app.add_option("--gen-epochs", cfg.search.model.generator_train.epochs,
                 "generator epochs per outer step")
      ->capture_default_str();
  app.add_option("--gen-batch", cfg.search.model.generator_batch,
                 "latent batch size per generator update")
      ->capture_default_str();
  double lr = cfg.search.model.discriminator_train.learning_rate;
  app.add_option("--learning-rate", lr, "optimizer learning rate for both networks")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.algorithm = falsify::search::algorithm_from_name(algorithm);
    cfg.out_dir = out_dir;
    cfg.search.model.discriminator_train.learning_rate = lr;
    cfg.search.model.generator_train.learning_rate = lr;

    falsify::bench::SummaryStats stats = falsify::bench::run_experiment(cfg);

    std::printf("algorithm=%s sut=%s replications=%d\n", algorithm.c_str(),
                cfg.sut.c_str(), stats.replications);
    std::printf("falsifications=%d rate=%.3f\n", stats.falsifications, stats.rate);
    std::printf("observed minimum: median=%.6g mean=%.6g sd=%s\n",
                stats.median_observed_minimum, stats.mean_observed_minimum,
                stats.sd_observed_minimum
                    ? std::to_string(*stats.sd_observed_minimum).c_str()
                    : "null");
    std::printf("results written to %s\n", out_dir.c_str());
    return stats.falsifications >= 1 ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
