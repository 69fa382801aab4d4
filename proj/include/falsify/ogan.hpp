#pragma once

#include <random>
#include <span>
#include <vector>

#include "falsify/nets.hpp"

namespace falsify::ogan {

// Maps raw robustness onto [0,1] as clamp(raw / scale, 0, 1). The scale is
// fixed once per run (from the initial random-search phase), so a normalized
// value of 0 always means falsified.
struct RobustnessNormalizer {
  double scale = 1.0;

  double normalize(double raw) const {
    double v = raw / scale;
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  }
};

struct OganConfig {
  int latent_dim = 8;
  std::vector<int> generator_hidden{64, 64};
  std::vector<int> discriminator_hidden{64, 64};
  nets::TrainConfig discriminator_train{};  // 30 epochs per outer step
  nets::TrainConfig generator_train{};
  int generator_batch = 32;  // fresh latent samples per generator update

  void validate() const;
};

// Generator/discriminator surrogate for one requirement. The discriminator
// regresses tests onto normalized robustness; the generator is trained
// through the frozen discriminator toward predicted robustness 0. There is
// no real/fake discrimination anywhere.
class OganModel {
 public:
  OganModel(int test_dim, RobustnessNormalizer normalizer, const OganConfig& cfg,
            std::mt19937_64& rng);

  // One uniform latent draw mapped through the generator; components lie in
  // [-1,1] by the tanh output layer.
  std::vector<double> generate(std::mt19937_64& rng) const;
  // Estimated normalized robustness in [0,1] (sigmoid output).
  double predict(std::span<const double> test) const;

  // Refits the discriminator from its current parameters on the executed
  // tests against normalize(raw robustness).
  void update_discriminator(const std::vector<std::vector<double>>& tests,
                            const std::vector<double>& raw_robustness,
                            std::mt19937_64& rng);
  // Trains the generator through the frozen discriminator on `batch_size`
  // fresh latent points with target 0. No-op when batch_size == 0.
  void update_generator(int batch_size, std::mt19937_64& rng);

  int test_dim() const { return generator_.output_dim(); }
  int latent_dim() const { return latent_dim_; }
  bool discriminator_trained() const { return discriminator_trained_; }
  const nets::Mlp& generator() const { return generator_; }
  const nets::Mlp& discriminator() const { return discriminator_; }
  const RobustnessNormalizer& normalizer() const { return normalizer_; }

 private:
  nets::Mlp generator_;
  nets::Mlp discriminator_;
  int latent_dim_;
  RobustnessNormalizer normalizer_;
  nets::TrainConfig discriminator_train_;
  nets::TrainConfig generator_train_;
  bool discriminator_trained_ = false;
};

}  // namespace falsify::ogan
