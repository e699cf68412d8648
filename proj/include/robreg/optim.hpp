// SPDX-License-Identifier: Apache-2.0
//
// Mini-batch Adam for empirical risk minimization over ReLU networks.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "robreg/datagen.hpp"
#include "robreg/losses.hpp"
#include "robreg/mlp.hpp"
#include "robreg/prng.hpp"

namespace robreg {

struct TrainConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
  int epochs = 1000;
  /// Batch size is ceil(n * batch_fraction).
  double batch_fraction = 0.25;
  bool shuffle = true;
  std::uint64_t seed = 2021;
  /// Permits epochs below the 400-epoch protocol minimum (tests, smoke runs).
  bool allow_short_schedule = false;

  static constexpr int kMinEpochs = 400;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

/// First and second moment accumulators plus the step counter.
struct AdamState {
  Gradients first_moment;
  Gradients second_moment;
  long long step = 0;

  static AdamState zeros_like(const MlpParams& params);
};

/// One bias-corrected Adam update in place. Throws DivergenceError (epoch -1) if
/// `grads` contains a non-finite entry or the update produces one.
void adam_step(AdamState& state, MlpParams& params, const Gradients& grads,
               const TrainConfig& cfg);

struct TrainTrace {
  /// Mean training loss of each epoch (sample-weighted over its mini-batches).
  std::vector<double> epoch_loss;

  std::string to_csv() const;
};

using EpochHook = std::function<void(int epoch, const MlpParams& params)>;

struct TrainResult {
  MlpParams params;
  TrainTrace trace;
};

/// Initializes with init_network(shape, rng) and runs cfg.epochs epochs of
/// mini-batch Adam, reshuffling from `rng` every epoch. Deterministic in
/// (dataset, shape, loss, cfg, rng state). Throws DivergenceError with the epoch.
TrainResult train(const Dataset& data, const NetworkShape& shape, const LossSpec& loss,
                  const TrainConfig& cfg, PrngStream& rng, const EpochHook& hook = {});

/// As above with a fresh stream PrngStream(cfg.seed).
TrainResult train(const Dataset& data, const NetworkShape& shape, const LossSpec& loss,
                  const TrainConfig& cfg);

}  // namespace robreg
