#include "falsify/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace falsify::search {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::single: return "single";
    case Algorithm::multi: return "multi";
    case Algorithm::mab: return "mab";
  }
  throw std::logic_error("unreachable algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "single") return Algorithm::single;
  if (name == "multi") return Algorithm::multi;
  if (name == "mab") return Algorithm::mab;
  throw std::invalid_argument("unknown algorithm: " + name);
}

void BudgetConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (!(lhs_fraction > 0.0 && lhs_fraction < 1.0))
    throw std::invalid_argument("lhs_fraction must lie in (0,1)");
  if (lhs_count() < 1)
    throw std::invalid_argument("budget * lhs_fraction must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("delta must lie in (0,1]");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
    throw std::invalid_argument("warmup_fraction must lie in [0,1)");
}

int BudgetConfig::lhs_count() const {
  return static_cast<int>(std::floor(static_cast<double>(budget) * lhs_fraction));
}

int BudgetConfig::warmup_count() const {
  return static_cast<int>(std::floor(static_cast<double>(budget) * warmup_fraction));
}

int BudgetConfig::max_escalations() const {
  return static_cast<int>(std::ceil(1.0 / delta)) + 1;
}

double RunRecord::observed_minimum() const {
  double m = std::numeric_limits<double>::infinity();
  for (const ExecutionRow& row : rows)
    for (double v : row.robustness) m = std::min(m, v);
  return m;
}

std::optional<int> RunRecord::executions_to_falsification() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& rob = rows[i].robustness;
    if (*std::min_element(rob.begin(), rob.end()) <= 0.0)
      return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

int RunRecord::max_escalations() const {
  int m = 0;
  for (const ExecutionRow& row : rows) m = std::max(m, row.escalations);
  return m;
}

nlohmann::json to_json(const RunRecord& record) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ExecutionRow& row : record.rows) {
    rows.push_back({{"test", row.test.coords},
                    {"robustness", row.robustness},
                    {"source", row.source == Source::lhs ? "lhs" : "gan"},
                    {"model_index", row.model_index},
                    {"accepted_target", row.accepted_target},
                    {"escalations", row.escalations}});
  }
  return {{"rows", rows},
          {"termination", record.termination == Termination::falsified
                              ? "falsified"
                              : "budget_exhausted"},
          {"winner_counts", record.winner_counts},
          {"seed", record.seed}};
}

std::vector<Test> latin_hypercube(int count, int dim, std::mt19937_64& rng) {
  if (count < 1 || dim < 1)
    throw std::invalid_argument("latin_hypercube needs count >= 1 and dim >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double width = 2.0 / static_cast<double>(count);
  std::vector<Test> tests(static_cast<std::size_t>(count));
  for (auto& t : tests) t.coords.resize(static_cast<std::size_t>(dim));
  std::vector<int> strata(static_cast<std::size_t>(count));
  for (int j = 0; j < dim; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int i = 0; i < count; ++i) {
      double u = unit(rng);
      double c = -1.0 + (static_cast<double>(strata[static_cast<std::size_t>(i)]) + u) * width;
      tests[static_cast<std::size_t>(i)].coords[static_cast<std::size_t>(j)] =
          std::min(1.0, std::max(-1.0, c));
    }
  }
  return tests;
}

int mab_pick(std::span<const int> winner_counts, std::mt19937_64& rng) {
  const int n = static_cast<int>(winner_counts.size());
  if (n < 1) throw std::invalid_argument("mab_pick needs at least one requirement");
  if (n == 1) return 0;  // forced pick, no randomness consumed
  long total = 0;
  for (int c : winner_counts) {
    if (c < 0) throw std::invalid_argument("winner counts must be nonnegative");
    total += c;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng) * static_cast<double>(total + n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += static_cast<double>(winner_counts[static_cast<std::size_t>(i)] + 1);
    if (u < acc) return i;
  }
  return n - 1;
}

namespace {

int argmin(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[static_cast<std::size_t>(i)] < values[static_cast<std::size_t>(best)])
      best = i;  // ties keep the lowest index
  return best;
}

// One falsification run. All three algorithms share this engine; they differ
// in the number of surrogates, the robustness view each surrogate trains on,
// and whether the post-warm-up phase narrows to a single chosen surrogate.
class Engine {
 public:
  Engine(suts::Sut& sut, Algorithm alg, const SearchConfig& cfg, std::uint64_t seed)
      : sut_(sut), alg_(alg), cfg_(cfg), rng_(seed) {
    cfg_.budget.validate();
    cfg_.model.validate();
    if (sut_.requirement_count() < 1 || sut_.input_dim() < 1)
      throw std::invalid_argument("SUT must have >= 1 requirement and dimension");
    if (alg_ == Algorithm::mab &&
        cfg_.budget.warmup_count() < cfg_.budget.lhs_count())
      throw std::invalid_argument(
          "mab warm-up must cover at least the LHS fraction of the budget");
    n_req_ = sut_.requirement_count();
    n_models_ = alg_ == Algorithm::single ? 1 : n_req_;
    record_.seed = seed;
    record_.winner_counts.assign(static_cast<std::size_t>(n_req_), 0);
    view_values_.resize(static_cast<std::size_t>(n_models_));
  }

  RunRecord run() {
    const int budget = cfg_.budget.budget;

    for (Test& t : latin_hypercube(cfg_.budget.lhs_count(), sut_.input_dim(), rng_)) {
      if (execute(std::move(t), Source::lhs, -1, 0.0, 0)) {
        record_.termination = Termination::falsified;
        return std::move(record_);
      }
    }

    build_models();

    while (static_cast<int>(record_.rows.size()) < budget) {
      Candidate c;
      if (alg_ == Algorithm::mab &&
          static_cast<int>(record_.rows.size()) >= cfg_.budget.warmup_count()) {
        int chosen = mab_pick(record_.winner_counts, rng_);
        train_model(chosen);
        c = escalate(chosen, chosen + 1);
      } else {
        for (int i = 0; i < n_models_; ++i) train_model(i);
        c = escalate(0, n_models_);
      }
      if (execute(std::move(c.test), Source::gan, c.model_index, c.target,
                  c.escalations)) {
        record_.termination = Termination::falsified;
        return std::move(record_);
      }
    }
    record_.termination = Termination::budget_exhausted;
    return std::move(record_);
  }

 private:
  struct Candidate {
    Test test;
    int model_index = 0;
    double target = 0.0;
    int escalations = 0;
  };

  // The robustness value surrogate `model` trains on: Algorithm 1 only
  // observes the minimum component, the others see their own requirement.
  double view_value(int model, const std::vector<double>& rob) const {
    if (alg_ == Algorithm::single)
      return *std::min_element(rob.begin(), rob.end());
    return rob[static_cast<std::size_t>(model)];
  }

  // Executes the test, records the row and winner, and reports whether the
  // raw outcome falsified (min component <= 0).
  bool execute(Test t, Source source, int model_index, double target, int escalations) {
    std::vector<double> rob;
    try {
      rob = sut_.execute(t.coords);
    } catch (const std::exception& e) {
      throw RunAborted(std::string("SUT execution failed: ") + e.what(),
                       std::move(record_));
    }
    if (static_cast<int>(rob.size()) != n_req_)
      throw RunAborted("SUT returned wrong robustness vector length", std::move(record_));
    for (double v : rob)
      if (!std::isfinite(v))
        throw RunAborted("SUT returned non-finite robustness", std::move(record_));

    int winner = argmin(rob);
    record_.winner_counts[static_cast<std::size_t>(winner)] += 1;
    executed_tests_.push_back(t.coords);
    for (int m = 0; m < n_models_; ++m)
      view_values_[static_cast<std::size_t>(m)].push_back(view_value(m, rob));
    double outcome = rob[static_cast<std::size_t>(winner)];
    record_.rows.push_back({std::move(t), std::move(rob), source, model_index,
                            target, escalations});
    return outcome <= 0.0;
  }

  // Surrogates are created after the LHS phase so each normalizer can fix
  // its scale to the maximum robustness seen during random search.
  void build_models() {
    models_.reserve(static_cast<std::size_t>(n_models_));
    for (int m = 0; m < n_models_; ++m) {
      const auto& values = view_values_[static_cast<std::size_t>(m)];
      double scale = *std::max_element(values.begin(), values.end());
      scale = std::max(scale, 1e-9);
      models_.emplace_back(sut_.input_dim(), ogan::RobustnessNormalizer{scale},
                           cfg_.model, rng_);
    }
  }

  void train_model(int i) {
    auto& model = models_[static_cast<std::size_t>(i)];
    model.update_discriminator(executed_tests_, view_values_[static_cast<std::size_t>(i)],
                               rng_);
    model.update_generator(cfg_.model.generator_batch, rng_);
  }

  // Target escalation over surrogates [first, last): each iteration raises
  // the target by delta, draws one candidate per surrogate, and accepts the
  // best prediction once it reaches the target.
  Candidate escalate(int first, int last) {
    Candidate c;
    double target = 0.0;
    int iterations = 0;
    std::vector<Test> proposals(static_cast<std::size_t>(last - first));
    std::vector<double> predictions(static_cast<std::size_t>(last - first));
    while (true) {
      target += cfg_.budget.delta;
      ++iterations;
      for (int i = first; i < last; ++i) {
        auto& model = models_[static_cast<std::size_t>(i)];
        Test t{model.generate(rng_)};
        predictions[static_cast<std::size_t>(i - first)] = model.predict(t.coords);
        proposals[static_cast<std::size_t>(i - first)] = std::move(t);
      }
      int best = argmin(predictions);
      if (predictions[static_cast<std::size_t>(best)] <= target) {
        c.test = std::move(proposals[static_cast<std::size_t>(best)]);
        c.model_index = first + best;
        c.target = target;
        c.escalations = iterations;
        return c;
      }
    }
  }

  suts::Sut& sut_;
  Algorithm alg_;
  SearchConfig cfg_;
  std::mt19937_64 rng_;
  RunRecord record_;
  int n_req_ = 0;
  int n_models_ = 0;
  std::vector<ogan::OganModel> models_;
  std::vector<std::vector<double>> executed_tests_;
  std::vector<std::vector<double>> view_values_;  // per surrogate, raw view
};

}  // namespace

RunRecord falsify_single(suts::Sut& sut, const SearchConfig& cfg, std::uint64_t seed) {
  return Engine(sut, Algorithm::single, cfg, seed).run();
}

RunRecord falsify_multi(suts::Sut& sut, const SearchConfig& cfg, std::uint64_t seed) {
  return Engine(sut, Algorithm::multi, cfg, seed).run();
}

RunRecord falsify_mab(suts::Sut& sut, const SearchConfig& cfg, std::uint64_t seed) {
  return Engine(sut, Algorithm::mab, cfg, seed).run();
}

RunRecord falsify(Algorithm algorithm, suts::Sut& sut, const SearchConfig& cfg,
                  std::uint64_t seed) {
  return Engine(sut, algorithm, cfg, seed).run();
}

}  // namespace falsify::search
