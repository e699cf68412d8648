// SPDX-License-Identifier: Apache-2.0
#include "robreg/optim.hpp"

#include <cmath>
#include <numeric>

#include "robreg/error.hpp"
#include "robreg/text.hpp"

namespace robreg {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw InvalidArgument("learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw InvalidArgument("beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw InvalidArgument("beta2 must lie in (0, 1)");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (epochs < 1) throw InvalidArgument("epochs must be at least 1");
  if (epochs < kMinEpochs && !allow_short_schedule)
    throw InvalidArgument("epochs must be at least " + std::to_string(kMinEpochs) +
                          " (set allow_short_schedule to override)");
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0))
    throw InvalidArgument("batch_fraction must lie in (0, 1]");
}

AdamState AdamState::zeros_like(const MlpParams& params) {
  return {Gradients::zeros_like(params), Gradients::zeros_like(params), 0};
}

void adam_step(AdamState& state, MlpParams& params, const Gradients& grads,
               const TrainConfig& cfg) {
  auto& layers = params.layers();
  if (grads.layers.size() != layers.size() || state.first_moment.layers.size() != layers.size())
    throw InvalidArgument("Adam state, gradients and parameters have different layer counts");
  if (!grads.all_finite()) throw DivergenceError("non-finite gradient", -1);

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);

  auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    theta.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.eps);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    update(layers[k].weight, grads.layers[k].weight, state.first_moment.layers[k].weight,
           state.second_moment.layers[k].weight);
    update(layers[k].bias, grads.layers[k].bias, state.first_moment.layers[k].bias,
           state.second_moment.layers[k].bias);
  }
  if (!params.all_finite()) throw DivergenceError("non-finite parameter after Adam step", -1);
}

std::string TrainTrace::to_csv() const {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < epoch_loss.size(); ++e)
    out += std::to_string(e + 1) + "," + text::format_double(epoch_loss[e]) + "\n";
  return out;
}

TrainResult train(const Dataset& data, const NetworkShape& shape, const LossSpec& loss,
                  const TrainConfig& cfg, PrngStream& rng, const EpochHook& hook) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(data.size());
  if (n == 0) throw InvalidArgument("cannot train on an empty dataset");
  if (data.dim() != shape.input_dim())
    throw InvalidArgument("dataset dimension " + std::to_string(data.dim()) +
                          " does not match network input " + std::to_string(shape.input_dim()));

  MlpParams params = init_network(shape, rng);
  AdamState state = AdamState::zeros_like(params);
  Gradients grads = Gradients::zeros_like(params);

  const auto batch = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n) * cfg.batch_fraction - 1e-12));
  const std::size_t batch_size = std::max<std::size_t>(1, std::min(batch, n));

  const Eigen::MatrixXd xs_t = data.xs.transpose();  // d x n, one sample per column
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainTrace trace;
  trace.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));
  Eigen::MatrixXd bx;
  std::vector<double> by;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    }
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t m = std::min(batch_size, n - start);
      bx.resize(xs_t.rows(), static_cast<Eigen::Index>(m));
      by.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        const auto src = static_cast<Eigen::Index>(order[start + j]);
        bx.col(static_cast<Eigen::Index>(j)) = xs_t.col(src);
        by[j] = data.ys(src);
      }
      try {
        const double risk = backward_into(params, bx, by, loss, grads);
        if (!std::isfinite(risk)) throw DivergenceError("non-finite training loss", -1);
        adam_step(state, params, grads, cfg);
        epoch_sum += risk * static_cast<double>(m);
      } catch (const DivergenceError& e) {
        throw DivergenceError("training diverged: " + std::string(e.what()), epoch);
      }
    }
    trace.epoch_loss.push_back(epoch_sum / static_cast<double>(n));
    if (hook) hook(epoch, params);
  }
  return {std::move(params), std::move(trace)};
}

TrainResult train(const Dataset& data, const NetworkShape& shape, const LossSpec& loss,
                  const TrainConfig& cfg) {
  PrngStream rng(cfg.seed);
  return train(data, shape, loss, cfg, rng);
}

}  // namespace robreg
