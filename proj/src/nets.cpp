#include "falsify/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace falsify::nets {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("decay rates must lie in (0,1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::leaky_relu: return z >= 0.0 ? z : 0.01 * z;
    case Activation::tanh: return std::tanh(z);
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  throw std::logic_error("unreachable activation");
}

// Derivative in terms of pre-activation z and output y.
double activate_deriv(Activation a, double z, double y) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::leaky_relu: return z >= 0.0 ? 1.0 : 0.01;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::sigmoid: return y * (1.0 - y);
  }
  throw std::logic_error("unreachable activation");
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  throw std::logic_error("unreachable activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "leaky_relu") return Activation::leaky_relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

void validate_layers(const std::vector<Layer>& layers) {
  if (layers.empty()) throw std::invalid_argument("network needs at least one layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (layer.in < 1 || layer.out < 1)
      throw std::invalid_argument("layer dimensions must be >= 1");
    if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
        layer.b.size() != static_cast<std::size_t>(layer.out))
      throw std::invalid_argument("layer parameter sizes do not match dimensions");
    if (l + 1 < layers.size() && layers[l + 1].in != layer.out)
      throw std::invalid_argument("adjacent layer dimensions disagree");
    for (double v : layer.w)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite weight");
    for (double v : layer.b)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite bias");
  }
}

// Per-layer forward cache: layer input, pre-activation, output.
struct Cache {
  std::vector<std::vector<double>> input;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
};

std::vector<double> forward_stack(std::span<const Layer* const> stack,
                                  std::span<const double> x, Cache* cache) {
  std::vector<double> cur(x.begin(), x.end());
  for (const Layer* layer : stack) {
    if (cache) cache->input.push_back(cur);
    std::vector<double> z(static_cast<std::size_t>(layer->out));
    for (int r = 0; r < layer->out; ++r) {
      const double* row = layer->w.data() + static_cast<std::size_t>(r) * layer->in;
      double acc = layer->b[static_cast<std::size_t>(r)];
      for (int c = 0; c < layer->in; ++c) acc += row[c] * cur[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = acc;
    }
    std::vector<double> y(z.size());
    for (std::size_t r = 0; r < z.size(); ++r) y[r] = activate(layer->act, z[r]);
    if (cache) {
      cache->pre.push_back(z);
      cache->post.push_back(y);
    }
    cur = std::move(y);
  }
  return cur;
}

struct LayerGrad {
  std::vector<double> dw;
  std::vector<double> db;
};

// Backpropagates dL/dy through the stack, accumulating parameter gradients
// for the first `n_grad` layers (the trainable prefix).
void backward_stack(std::span<const Layer* const> stack, const Cache& cache,
                    std::vector<double> dy, std::size_t n_grad,
                    std::vector<LayerGrad>& grads) {
  for (std::size_t l = stack.size(); l-- > 0;) {
    const Layer& layer = *stack[l];
    const auto& z = cache.pre[l];
    const auto& y = cache.post[l];
    const auto& x = cache.input[l];
    std::vector<double> dz(static_cast<std::size_t>(layer.out));
    for (int r = 0; r < layer.out; ++r)
      dz[static_cast<std::size_t>(r)] =
          dy[static_cast<std::size_t>(r)] *
          activate_deriv(layer.act, z[static_cast<std::size_t>(r)],
                         y[static_cast<std::size_t>(r)]);
    if (l < n_grad) {
      LayerGrad& g = grads[l];
      for (int r = 0; r < layer.out; ++r) {
        double d = dz[static_cast<std::size_t>(r)];
        double* dw_row = g.dw.data() + static_cast<std::size_t>(r) * layer.in;
        for (int c = 0; c < layer.in; ++c) dw_row[c] += d * x[static_cast<std::size_t>(c)];
        g.db[static_cast<std::size_t>(r)] += d;
      }
    }
    if (l == 0) break;
    std::vector<double> dx(static_cast<std::size_t>(layer.in), 0.0);
    for (int r = 0; r < layer.out; ++r) {
      const double* row = layer.w.data() + static_cast<std::size_t>(r) * layer.in;
      double d = dz[static_cast<std::size_t>(r)];
      for (int c = 0; c < layer.in; ++c) dx[static_cast<std::size_t>(c)] += row[c] * d;
    }
    dy = std::move(dx);
  }
}

struct AdamState {
  std::vector<LayerGrad> m;
  std::vector<LayerGrad> v;
  long step = 0;
};

AdamState make_adam_state(const std::vector<Layer*>& trainable) {
  AdamState s;
  for (const Layer* layer : trainable) {
    s.m.push_back({std::vector<double>(layer->w.size(), 0.0),
                   std::vector<double>(layer->b.size(), 0.0)});
    s.v.push_back({std::vector<double>(layer->w.size(), 0.0),
                   std::vector<double>(layer->b.size(), 0.0)});
  }
  return s;
}

void adam_update(std::vector<Layer*>& trainable, const std::vector<LayerGrad>& grads,
                 AdamState& state, const TrainConfig& cfg) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  };
  for (std::size_t l = 0; l < trainable.size(); ++l) {
    update(trainable[l]->w, grads[l].dw, state.m[l].dw, state.v[l].dw);
    update(trainable[l]->b, grads[l].db, state.m[l].db, state.v[l].db);
  }
}

// Shared training loop: the full forward stack is `stack`; its first
// `trainable.size()` layers are updated, the rest stay frozen.
std::vector<double> fit_stack(const std::vector<const Layer*>& stack,
                              std::vector<Layer*> trainable,
                              const std::vector<std::vector<double>>& inputs,
                              const std::vector<std::vector<double>>& targets,
                              const TrainConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  if (inputs.empty()) throw std::invalid_argument("training data must be nonempty");
  if (inputs.size() != targets.size())
    throw std::invalid_argument("inputs and targets differ in count");
  const int in_dim = stack.front()->in;
  const int out_dim = stack.back()->out;
  for (const auto& x : inputs)
    if (static_cast<int>(x.size()) != in_dim)
      throw std::invalid_argument("input dimension mismatch");
  for (const auto& t : targets)
    if (static_cast<int>(t.size()) != out_dim)
      throw std::invalid_argument("target dimension mismatch");

  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  if (cfg.epochs == 0) return history;

  AdamState adam = make_adam_state(trainable);
  std::vector<LayerGrad> grads;
  for (const Layer* layer : trainable)
    grads.push_back({std::vector<double>(layer->w.size(), 0.0),
                     std::vector<double>(layer->b.size(), 0.0)});

  const std::size_t n = inputs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const double batch_n = static_cast<double>(stop - start);
      for (auto& g : grads) {
        std::fill(g.dw.begin(), g.dw.end(), 0.0);
        std::fill(g.db.begin(), g.db.end(), 0.0);
      }
      for (std::size_t k = start; k < stop; ++k) {
        const auto& x = inputs[order[k]];
        const auto& t = targets[order[k]];
        Cache cache;
        std::vector<double> y = forward_stack(stack, x, &cache);
        std::vector<double> dy(y.size());
        double sample_loss = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
          double r = y[j] - t[j];
          sample_loss += r * r;
          dy[j] = 2.0 * r / (batch_n * static_cast<double>(out_dim));
        }
        loss_sum += sample_loss / static_cast<double>(out_dim);
        backward_stack(stack, cache, std::move(dy), trainable.size(), grads);
      }
      adam_update(trainable, grads, adam, cfg);
    }
    const double epoch_loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      throw NanLossError("training loss became non-finite at epoch " +
                         std::to_string(epoch));
    history.push_back(epoch_loss);
  }
  return history;
}

}  // namespace

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  validate_layers(layers_);
}

Mlp::Mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
         std::mt19937_64& rng) {
  if (dims.size() < 2) throw std::invalid_argument("need at least input and output dims");
  if (acts.size() != dims.size() - 1)
    throw std::invalid_argument("need one activation per layer");
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.act = acts[l];
    if (layer.in < 1 || layer.out < 1)
      throw std::invalid_argument("layer dimensions must be >= 1");
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    for (double& v : layer.w) v = dist(rng);
    layer.b.assign(static_cast<std::size_t>(layer.out), 0.0);
    layers_.push_back(std::move(layer));
  }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  if (layers_.empty()) throw std::logic_error("forward on empty network");
  if (static_cast<int>(x.size()) != input_dim())
    throw std::invalid_argument("input dimension mismatch");
  std::vector<const Layer*> stack;
  stack.reserve(layers_.size());
  for (const Layer& layer : layers_) stack.push_back(&layer);
  return forward_stack(stack, x, nullptr);
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& layer : layers_) {
    layers.push_back({{"in", layer.in},
                      {"out", layer.out},
                      {"activation", activation_name(layer.act)},
                      {"w", layer.w},
                      {"b", layer.b}});
  }
  return {{"layers", layers}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  std::vector<Layer> layers;
  for (const auto& lj : j.at("layers")) {
    Layer layer;
    layer.in = lj.at("in").get<int>();
    layer.out = lj.at("out").get<int>();
    layer.act = activation_from_name(lj.at("activation").get<std::string>());
    layer.w = lj.at("w").get<std::vector<double>>();
    layer.b = lj.at("b").get<std::vector<double>>();
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

std::vector<double> fit_mse(Mlp& m, const std::vector<std::vector<double>>& inputs,
                            const std::vector<std::vector<double>>& targets,
                            const TrainConfig& cfg, std::mt19937_64& rng) {
  std::vector<const Layer*> stack;
  std::vector<Layer*> trainable;
  for (Layer& layer : m.layers_) {
    stack.push_back(&layer);
    trainable.push_back(&layer);
  }
  return fit_stack(stack, std::move(trainable), inputs, targets, cfg, rng);
}

double mse_loss(const Mlp& m, const std::vector<std::vector<double>>& inputs,
                const std::vector<std::vector<double>>& targets) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw std::invalid_argument("inputs and targets must be nonempty and equal in count");
  const double out_dim = static_cast<double>(m.output_dim());
  double loss = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<double> y = m.forward(inputs[k]);
    for (std::size_t j = 0; j < y.size(); ++j) {
      double r = y[j] - targets[k][j];
      loss += r * r;
    }
  }
  return loss / (static_cast<double>(inputs.size()) * out_dim);
}

std::vector<double> mse_gradient(const Mlp& m,
                                 const std::vector<std::vector<double>>& inputs,
                                 const std::vector<std::vector<double>>& targets) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw std::invalid_argument("inputs and targets must be nonempty and equal in count");
  std::vector<const Layer*> stack;
  for (const Layer& layer : m.layers()) stack.push_back(&layer);
  std::vector<LayerGrad> grads;
  for (const Layer& layer : m.layers())
    grads.push_back({std::vector<double>(layer.w.size(), 0.0),
                     std::vector<double>(layer.b.size(), 0.0)});
  const double scale = static_cast<double>(inputs.size()) *
                       static_cast<double>(m.output_dim());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    Cache cache;
    std::vector<double> y = forward_stack(stack, inputs[k], &cache);
    std::vector<double> dy(y.size());
    for (std::size_t j = 0; j < y.size(); ++j)
      dy[j] = 2.0 * (y[j] - targets[k][j]) / scale;
    backward_stack(stack, cache, std::move(dy), stack.size(), grads);
  }
  std::vector<double> flat;
  for (const LayerGrad& g : grads) {
    flat.insert(flat.end(), g.dw.begin(), g.dw.end());
    flat.insert(flat.end(), g.db.begin(), g.db.end());
  }
  return flat;
}

std::vector<double> fit_composite(const Mlp& frozen_head, Mlp& tail,
                                  const std::vector<std::vector<double>>& latent_batch,
                                  const std::vector<std::vector<double>>& target_batch,
                                  const TrainConfig& cfg, std::mt19937_64& rng) {
  if (tail.output_dim() != frozen_head.input_dim())
    throw std::invalid_argument("tail output dim must equal head input dim");
  std::vector<const Layer*> stack;
  std::vector<Layer*> trainable;
  for (Layer& layer : tail.layers_) {
    stack.push_back(&layer);
    trainable.push_back(&layer);
  }
  for (const Layer& layer : frozen_head.layers_) stack.push_back(&layer);
  return fit_stack(stack, std::move(trainable), latent_batch, target_batch, cfg, rng);
}

}  // namespace falsify::nets
