// SPDX-License-Identifier: Apache-2.0
//
// Fully connected ReLU networks f(x) = L_D o relu o ... o relu o L_0 (x),
// with L_i(v) = W_i v + b_i, evaluated and differentiated in double precision.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robreg/losses.hpp"
#include "robreg/prng.hpp"

namespace robreg {

/// Layer widths (d_0 = d, d_1, ..., d_D, 1): D hidden layers, D + 1 linear maps.
class NetworkShape {
 public:
  /// Requires at least two widths, all >= 1, last == 1.
  explicit NetworkShape(std::vector<int> widths);

  /// Input d, `depth` hidden layers of `width` units, scalar output.
  static NetworkShape rectangle(int d, int width, int depth);
  /// (d, 256, 256, 256, 256, 256, 1)
  static NetworkShape nets256(int d) { return rectangle(d, 256, 5); }

  const std::vector<int>& widths() const noexcept { return widths_; }
  int input_dim() const noexcept { return widths_.front(); }
  /// Number of hidden layers D.
  int depth() const noexcept { return static_cast<int>(widths_.size()) - 2; }
  /// Max hidden width W (0 when there are no hidden layers).
  int width() const noexcept;
  int linear_layers() const noexcept { return static_cast<int>(widths_.size()) - 1; }

  /// U = sum of hidden widths.
  std::int64_t neuron_count() const noexcept;
  /// S = sum_i d_{i+1} (d_i + 1).
  std::int64_t param_count() const noexcept;

  std::string to_string() const;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;

 private:
  std::vector<int> widths_;
};

inline std::int64_t param_count(const NetworkShape& shape) { return shape.param_count(); }
inline std::int64_t neuron_count(const NetworkShape& shape) { return shape.neuron_count(); }

struct DenseLayer {
  Eigen::MatrixXd weight;  // d_{i+1} x d_i
  Eigen::VectorXd bias;    // d_{i+1}
};

class MlpParams {
 public:
  /// All-zero parameters for `shape`.
  explicit MlpParams(NetworkShape shape);
  /// Throws InvalidArgument if dimensions disagree with `shape` or an entry is non-finite.
  MlpParams(NetworkShape shape, std::vector<DenseLayer> layers);

  const NetworkShape& shape() const noexcept { return shape_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  DenseLayer& layer(int i) { return layers_.at(static_cast<std::size_t>(i)); }
  const DenseLayer& layer(int i) const { return layers_.at(static_cast<std::size_t>(i)); }

  bool all_finite() const;

  friend bool operator==(const MlpParams& a, const MlpParams& b);

 private:
  NetworkShape shape_;
  std::vector<DenseLayer> layers_;
};

/// Mean gradient of the empirical risk; same shapes as MlpParams.
struct Gradients {
  std::vector<DenseLayer> layers;

  static Gradients zeros_like(const MlpParams& params);
  bool all_finite() const;
};

/// Weights and biases of each linear map drawn iid Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// layer by layer, weights (row-major) before biases.
MlpParams init_network(const NetworkShape& shape, PrngStream& rng);

/// f(x) for a single input of dimension d.
double forward(const MlpParams& params, std::span<const double> x);

/// Outputs for a batch stored one sample per column (d x m).
Eigen::RowVectorXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& xs);

/// Pre-activations Z_i of every linear map and the inputs A_i fed to it.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;           // A_0 = xs, A_{i+1} = relu(Z_i)
  std::vector<Eigen::MatrixXd> pre_activations;  // Z_i = W_i A_i + b_i
  const Eigen::MatrixXd& output() const { return pre_activations.back(); }
};

ForwardCache forward_cached(const MlpParams& params, const Eigen::MatrixXd& xs);

struct BackwardResult {
  double risk = 0.0;
  Gradients grads;
};

/// Mean loss over the batch (columns of `xs`, targets `ys`) and its exact gradient.
/// ReLU'(0) is taken as 0. Throws InvalidArgument on an empty batch or a dimension
/// mismatch, DivergenceError if the network output is non-finite.
BackwardResult backward(const MlpParams& params, const Eigen::MatrixXd& xs,
                        std::span<const double> ys, const LossSpec& loss);

/// Same as backward() but writes into a preallocated gradient buffer.
double backward_into(const MlpParams& params, const Eigen::MatrixXd& xs,
                     std::span<const double> ys, const LossSpec& loss, Gradients& grads);

struct PdimBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// c_lo S D log(S / D) and c_hi S D log(S); requires S > D >= 1.
PdimBounds pdim_bounds(std::int64_t size, std::int64_t depth, double c_lo = 1.0,
                       double c_hi = 1.0);
PdimBounds pdim_bounds(const NetworkShape& shape, double c_lo = 1.0, double c_hi = 1.0);

/// Text record: version tag, widths, then per layer the row-major weights and the
/// biases, every value written in shortest round-trip form.
std::string serialize_model(const MlpParams& params);
MlpParams deserialize_model(std::string_view text);
void save_model(const MlpParams& params, const std::string& path);
MlpParams load_model(const std::string& path);

}  // namespace robreg
