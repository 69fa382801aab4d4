#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "falsify/ogan.hpp"
#include "falsify/suts.hpp"
#include "json.hpp"

namespace falsify::search {

// A point in normalized input space [-1,1]^d; SUT adapters own the mapping
// to raw ranges.
struct Test {
  std::vector<double> coords;
};

enum class Algorithm { single, multi, mab };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct BudgetConfig {
  int budget = 80;               // total SUT executions
  double lhs_fraction = 0.25;    // share spent on Latin hypercube sampling
  double delta = 0.05;           // escalation increment for the target
  double warmup_fraction = 0.5;  // Algorithm 3 only; includes the LHS phase

  void validate() const;
  int lhs_count() const;     // floor(budget * lhs_fraction)
  int warmup_count() const;  // floor(budget * warmup_fraction)
  // Escalation acceptance is guaranteed within ceil(1/delta) + 1 iterations.
  int max_escalations() const;
};

struct SearchConfig {
  BudgetConfig budget{};
  ogan::OganConfig model{};
};

enum class Source { lhs, gan };
enum class Termination { falsified, budget_exhausted };

struct ExecutionRow {
  Test test;
  std::vector<double> robustness;  // raw value per requirement
  Source source = Source::lhs;
  int model_index = -1;          // proposing surrogate, -1 for LHS rows
  double accepted_target = 0.0;  // escalation target at acceptance (GAN rows)
  int escalations = 0;           // inner-loop iterations (GAN rows)
};

// Full trace of one falsification run.
struct RunRecord {
  std::vector<ExecutionRow> rows;
  Termination termination = Termination::budget_exhausted;
  std::vector<int> winner_counts;  // per requirement, one increment per execution
  std::uint64_t seed = 0;

  double observed_minimum() const;  // min over rows of min over components
  // 1-based execution count at the first falsifying row, empty if none.
  std::optional<int> executions_to_falsification() const;
  int max_escalations() const;
};

nlohmann::json to_json(const RunRecord& record);

// Thrown when the SUT fails mid-run; carries the rows executed so far.
struct RunAborted : std::runtime_error {
  RunAborted(const std::string& msg, RunRecord partial_record)
      : std::runtime_error(msg), partial(std::move(partial_record)) {}
  RunRecord partial;
};

// Stratified sampling on [-1,1]^dim: per dimension, exactly one sample in
// each of `count` equal-width strata, uniform within the stratum, with an
// independent stratum permutation per dimension.
std::vector<Test> latin_hypercube(int count, int dim, std::mt19937_64& rng);

// Requirement selection with Laplace smoothing: index i is chosen with
// probability (winner_i + 1) / (sum_j winner_j + n). With a single
// requirement the pick is forced and consumes no randomness, which keeps
// falsify_mab trace-equal to falsify_single after warm-up.
int mab_pick(std::span<const int> winner_counts, std::mt19937_64& rng);

// Algorithm 1: one surrogate trained against the minimum robustness
// component. Runs floor(budget * lhs_fraction) LHS executions, then
// alternates surrogate training with target-escalation candidate search.
// Stops as soon as an executed test has min component <= 0.
RunRecord falsify_single(suts::Sut& sut, const SearchConfig& cfg, std::uint64_t seed);

// Algorithm 2: one surrogate per requirement, all trained every step; the
// candidate with the lowest predicted robustness is executed.
RunRecord falsify_multi(suts::Sut& sut, const SearchConfig& cfg, std::uint64_t seed);

// Algorithm 3: Algorithm 2 for the warm-up share of the budget, then one
// surrogate per step chosen by mab_pick over the winner counts. Winners are
// recorded as the argmin component of every executed robustness vector,
// which may differ from the proposing surrogate.
RunRecord falsify_mab(suts::Sut& sut, const SearchConfig& cfg, std::uint64_t seed);

RunRecord falsify(Algorithm algorithm, suts::Sut& sut, const SearchConfig& cfg,
                  std::uint64_t seed);

}  // namespace falsify::search
