#include "falsify/ogan.hpp"

#include <cmath>
#include <stdexcept>

namespace falsify::ogan {

void OganConfig::validate() const {
  if (latent_dim < 1) throw std::invalid_argument("latent_dim must be >= 1");
  if (generator_batch < 0) throw std::invalid_argument("generator_batch must be >= 0");
  for (int h : generator_hidden)
    if (h < 1) throw std::invalid_argument("generator hidden sizes must be >= 1");
  for (int h : discriminator_hidden)
    if (h < 1) throw std::invalid_argument("discriminator hidden sizes must be >= 1");
  discriminator_train.validate();
  generator_train.validate();
}

namespace {

nets::Mlp build_net(int in_dim, const std::vector<int>& hidden, int out_dim,
                    nets::Activation out_act, std::mt19937_64& rng) {
  std::vector<int> dims;
  dims.push_back(in_dim);
  for (int h : hidden) dims.push_back(h);
  dims.push_back(out_dim);
  std::vector<nets::Activation> acts(hidden.size(), nets::Activation::leaky_relu);
  acts.push_back(out_act);
  return nets::Mlp(dims, acts, rng);
}

}  // namespace

OganModel::OganModel(int test_dim, RobustnessNormalizer normalizer,
                     const OganConfig& cfg, std::mt19937_64& rng)
    : generator_(build_net(cfg.latent_dim, cfg.generator_hidden, test_dim,
                           nets::Activation::tanh, rng)),
      discriminator_(build_net(test_dim, cfg.discriminator_hidden, 1,
                               nets::Activation::sigmoid, rng)),
      latent_dim_(cfg.latent_dim),
      normalizer_(normalizer),
      discriminator_train_(cfg.discriminator_train),
      generator_train_(cfg.generator_train) {
  if (test_dim < 1) throw std::invalid_argument("test_dim must be >= 1");
  if (!(normalizer_.scale > 0.0) || !std::isfinite(normalizer_.scale))
    throw std::invalid_argument("normalizer scale must be finite and > 0");
  cfg.validate();
}

std::vector<double> OganModel::generate(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> latent(static_cast<std::size_t>(latent_dim_));
  for (double& v : latent) v = dist(rng);
  return generator_.forward(latent);
}

double OganModel::predict(std::span<const double> test) const {
  return discriminator_.forward(test)[0];
}

void OganModel::update_discriminator(const std::vector<std::vector<double>>& tests,
                                     const std::vector<double>& raw_robustness,
                                     std::mt19937_64& rng) {
  if (tests.empty()) throw std::invalid_argument("update_discriminator needs data");
  if (tests.size() != raw_robustness.size())
    throw std::invalid_argument("tests and robustness values differ in count");
  std::vector<std::vector<double>> targets;
  targets.reserve(raw_robustness.size());
  for (double raw : raw_robustness) targets.push_back({normalizer_.normalize(raw)});
  nets::fit_mse(discriminator_, tests, targets, discriminator_train_, rng);
  discriminator_trained_ = true;
}

void OganModel::update_generator(int batch_size, std::mt19937_64& rng) {
  if (batch_size == 0) return;
  if (batch_size < 0) throw std::invalid_argument("batch_size must be >= 0");
  if (!discriminator_trained_)
    throw std::logic_error("update_generator requires a trained discriminator");
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<std::vector<double>> latents(static_cast<std::size_t>(batch_size));
  for (auto& latent : latents) {
    latent.resize(static_cast<std::size_t>(latent_dim_));
    for (double& v : latent) v = dist(rng);
  }
  std::vector<std::vector<double>> targets(latents.size(), std::vector<double>{0.0});
  nets::fit_composite(discriminator_, generator_, latents, targets, generator_train_,
                      rng);
}

}  // namespace falsify::ogan
