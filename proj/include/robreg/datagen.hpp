// SPDX-License-Identifier: Apache-2.0
//
// Synthetic regression data Y = f0(X) + eta: univariate Donoho-Johnstone
// targets, Kolmogorov-Arnold style multivariate targets, inputs near a
// low-dimensional manifold, and symmetric heavy-tailed noise models.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robreg/prng.hpp"

namespace robreg {

enum class TargetKind { Blocks, Bumps, Heavisine, Doppler, KA, Custom };

std::string_view to_string(TargetKind kind);
TargetKind parse_target_kind(std::string_view name);

/// Blocks, Bumps, Heavisine or Doppler at x in [0, 1].
double dj_target(TargetKind kind, double x);

/// The univariate pool h_1..h_7 used to build KA targets; `index` in 1..7.
double ka_pool(int index, double x);

/// (2d + 1)(d + 1) indices drawn uniformly from {1..7} by PrngStream(seed).
/// Layout: for k = 0..2d, the outer function g_k followed by psi_{1,k}..psi_{d,k}.
std::vector<int> ka_indices(int d, std::uint64_t seed);

/// A deterministic regression function on [0, 1]^d.
class TargetFn {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  static TargetFn dj(TargetKind kind);
  /// Validates the index table size and range.
  static TargetFn ka(int d, std::vector<int> indices, std::uint64_t seed = 0);
  static TargetFn custom(int d, Evaluator fn, std::string name = "custom",
                         bool uniformly_continuous = true);

  TargetKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<int>& indices() const noexcept { return indices_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// False for the targets with jump discontinuities (Blocks, Heavisine).
  bool uniformly_continuous() const noexcept { return continuous_; }

  double operator()(std::span<const double> x) const;
  /// f0 for every row of an n x d matrix.
  Eigen::VectorXd eval_rows(const Eigen::MatrixXd& xs) const;

 private:
  TargetFn() = default;
  TargetKind kind_ = TargetKind::Custom;
  int dim_ = 1;
  std::string name_;
  std::vector<int> indices_;
  std::uint64_t seed_ = 0;
  bool continuous_ = true;
  Evaluator custom_;
};

/// KA target with indices from ka_indices(d, seed).
TargetFn ka_target(int d, std::uint64_t seed = 2021);
/// sum_k g_k(sum_m psi_{m,k}(x_m)).
double ka_eval(const TargetFn& target, std::span<const double> x);

enum class NoiseKind { None, Normal01, StudentT2, Cauchy01, Mixture };

/// Symmetric noise law. Mixture draws N(0, 1) with probability xi, otherwise
/// N(0, sd2^2). None is the degenerate law at 0 (noiseless data).
struct NoiseModel {
  NoiseKind kind = NoiseKind::Normal01;
  double xi = 0.8;
  double sd2 = 100.0;

  static NoiseModel none() { return {NoiseKind::None}; }
  static NoiseModel normal() { return {NoiseKind::Normal01}; }
  static NoiseModel student_t2() { return {NoiseKind::StudentT2}; }
  static NoiseModel cauchy() { return {NoiseKind::Cauchy01}; }
  static NoiseModel mixture(double xi = 0.8, double sd2 = 100.0) {
    return {NoiseKind::Mixture, xi, sd2};
  }

  void validate() const;
  /// "none", "normal", "t2", "cauchy", "mixture"
  std::string name() const;
  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

NoiseKind parse_noise_kind(std::string_view name);

double sample_noise(const NoiseModel& model, PrngStream& rng);

/// The fixed smooth embedding of z in [0, 1]^{d_M} into [0.1, 0.9]^d. Coordinate
/// i uses z_j with j = i mod d_M:
///   0.1 + 0.8 * (0.8 z_j + 0.1 (1 + sin(2 pi z_j + 2 pi i / d)))
/// which is strictly increasing in z_j.
Eigen::VectorXd manifold_embed(std::span<const double> z, int d);

/// n points phi(z) + u with z ~ U[0,1]^{d_M}, u ~ U[-rho, rho]^d, clipped to [0, 1]^d.
/// Requires 1 <= d_M < d and 0 <= rho < 1.
Eigen::MatrixXd manifold_inputs(int d_manifold, int d, double rho, int n, PrngStream& rng);

struct InputDesign {
  enum class Kind { Uniform, Manifold } kind = Kind::Uniform;
  int d_manifold = 1;
  double rho = 0.0;

  static InputDesign uniform() { return {}; }
  static InputDesign manifold(int d_manifold, double rho) {
    return {Kind::Manifold, d_manifold, rho};
  }
  std::string describe() const;
};

struct DatasetProvenance {
  std::string target;
  std::string noise;
  std::string inputs = "uniform";
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int n = 0;
  int d = 0;
};

struct Dataset {
  Eigen::MatrixXd xs;  // n x d
  Eigen::VectorXd ys;  // n
  DatasetProvenance provenance;

  int size() const noexcept { return static_cast<int>(xs.rows()); }
  int dim() const noexcept { return static_cast<int>(xs.cols()); }
};

/// xs from `inputs` (iid uniform by default), then ys = f0(xs) + eta drawn in row order.
Dataset make_dataset(const TargetFn& target, const NoiseModel& noise, int n, PrngStream& rng,
                     const InputDesign& inputs = InputDesign::uniform());

/// CSV with header x1..xd,y plus a JSON provenance sidecar (same stem, ".json").
void save_dataset(const Dataset& data, const std::string& csv_path);
Dataset load_dataset(const std::string& csv_path);
std::string provenance_sidecar_path(const std::string& csv_path);

}  // namespace robreg
