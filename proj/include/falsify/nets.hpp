#pragma once

#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace falsify::nets {

enum class Activation { identity, leaky_relu, tanh, sigmoid };

// Mini-batch gradient descent settings (adaptive moment estimation).
struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major, out x in
  std::vector<double> b;  // out
  Activation act = Activation::identity;
};

// Dense feed-forward network, 64-bit floats throughout.
class Mlp {
 public:
  Mlp() = default;
  // Explicit layers; validates adjacent dimensions and parameter sizes.
  explicit Mlp(std::vector<Layer> layers);
  // dims = {input, hidden..., output}; one activation per layer. Weights are
  // drawn uniformly from +-sqrt(6 / (fan_in + fan_out)), biases start at 0.
  Mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
      std::mt19937_64& rng);

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::vector<double> forward(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  friend struct Gradients;
  friend std::vector<double> fit_mse(Mlp&, const std::vector<std::vector<double>>&,
                                     const std::vector<std::vector<double>>&,
                                     const TrainConfig&, std::mt19937_64&);
  friend std::vector<double> fit_composite(const Mlp&, Mlp&,
                                           const std::vector<std::vector<double>>&,
                                           const std::vector<std::vector<double>>&,
                                           const TrainConfig&, std::mt19937_64&);
  std::vector<Layer> layers_;
};

struct NanLossError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Trains m in place on mean-squared error over (inputs, targets); returns the
// per-epoch mean loss (one entry per epoch). Throws NanLossError when the
// loss stops being finite.
std::vector<double> fit_mse(Mlp& m, const std::vector<std::vector<double>>& inputs,
                            const std::vector<std::vector<double>>& targets,
                            const TrainConfig& cfg, std::mt19937_64& rng);

// Trains `tail` so that frozen_head(tail(x)) matches the targets; the head's
// parameters are left untouched while gradients flow through it.
std::vector<double> fit_composite(const Mlp& frozen_head, Mlp& tail,
                                  const std::vector<std::vector<double>>& latent_batch,
                                  const std::vector<std::vector<double>>& target_batch,
                                  const TrainConfig& cfg, std::mt19937_64& rng);

// Batch MSE loss and its analytic gradient with respect to every parameter,
// flattened layer by layer (weights row-major, then biases). The gradient
// pairs with central finite differences in the gradient checks.
double mse_loss(const Mlp& m, const std::vector<std::vector<double>>& inputs,
                const std::vector<std::vector<double>>& targets);
std::vector<double> mse_gradient(const Mlp& m,
                                 const std::vector<std::vector<double>>& inputs,
                                 const std::vector<std::vector<double>>& targets);

}  // namespace falsify::nets
