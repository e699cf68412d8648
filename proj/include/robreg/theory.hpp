// SPDX-License-Identifier: Apache-2.0
//
// Closed-form calculators for deep robust regression: network designs, excess
// risk bounds (up to unspecified universal constants, which callers supply),
// convergence-rate exponents and the relative efficiency of network shapes.
//
// Logarithms are natural throughout.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robreg/datagen.hpp"
#include "robreg/losses.hpp"
#include "robreg/mlp.hpp"
#include "robreg/prng.hpp"

namespace robreg::theory {

enum class DesignLabel { DFW, WFD, DAW, RectanglePlain, RectangleQuadratic, ShenNM };

std::string_view to_string(DesignLabel label);

/// Size of a rectangle network: W(d+1) + (W^2 + W)(D - 1) + W + 1. Requires D >= 1.
std::int64_t rectangle_size(int d, std::int64_t width, std::int64_t depth);

/// A rectangle ReLU network of width W and depth D on d inputs, together with
/// the approximation parameters (N, M) it was derived from.
struct NetworkDesign {
  DesignLabel label = DesignLabel::RectanglePlain;
  int d = 1;
  std::int64_t W = 1;
  std::int64_t D = 1;
  std::int64_t S = 0;
  std::int64_t U = 0;
  double B = 1.0;
  std::int64_t N = 1;
  std::int64_t M = 1;

  /// Fills S and U from (d, W, D); throws if W or D < 1.
  static NetworkDesign rectangle(DesignLabel label, int d, std::int64_t width,
                                 std::int64_t depth, double bound = 1.0);
  NetworkShape shape() const;
};

/// Hoelder-type rate parameters. p may be +infinity (sub-exponential response).
/// d_target is the dimension driving the rate (d, or d_delta on a manifold);
/// 0 means "same as d".
struct RateSpec {
  double p = 2.0;
  double alpha = 1.0;
  int d = 1;
  double theta = 1.0;
  int d_target = 0;

  void validate() const;
  int effective_dim() const noexcept { return d_target > 0 ? d_target : d; }
};

struct WidthDepth {
  std::int64_t W = 0;
  std::int64_t D = 0;
};

/// W = max{4d floor(N^{1/d}) + 3d, 12N + 8}, D = 12M + 14.
WidthDepth shen_width_depth(int d, std::int64_t N, std::int64_t M);
NetworkDesign shen_design(int d, std::int64_t N, std::int64_t M, double bound = 1.0);

/// Largest k >= 0 with k^d <= N, computed exactly.
std::int64_t integer_root(std::int64_t N, int d);

using Modulus = std::function<double(double)>;
/// omega(r) = theta r^alpha.
Modulus holder_modulus(double theta, double alpha);

enum class ApproxVariant { L1_19, Thm2_18, Quadratic384 };

/// With r = N^{-2/d} M^{-2/d}: 19 sqrt(d) w(r), 18 sqrt(d) w(r) or 384 d w(r)^2.
double approx_error_bound(int d, std::int64_t N, std::int64_t M, const Modulus& omega,
                          ApproxVariant variant);

/// C lambda B S D log(S) log(n) / n^{1 - 1/p}; p = inf uses denominator n.
double stochastic_error_bound(double lambda, double B, double S, double D, double n, double p,
                              double C = 1.0);

/// The unspecified constants. Which ones are needed depends on the variant;
/// excess_bound reports every missing one.
struct BoundConstants {
  std::optional<double> C;            // stochastic-term constant (C, C_0 or C_1)
  std::optional<double> C2;           // manifold approximation constant
  std::optional<double> lambda_quad;  // lambda_{L,f*} of the local quadratic bound
  std::optional<double> calibration;  // C_{L,f*} of the self-calibration inequality

  /// Every constant set to 1.
  static BoundConstants unit() { return {1.0, 1.0, 1.0, 1.0}; }
};

enum class ExcessVariant { Lipschitz, Quadratic, Manifold, ManifoldQuadratic };

struct BoundTerms {
  double stochastic = 0.0;
  double approximation = 0.0;
  double total = 0.0;
};

/// Stochastic plus approximation bound for `design` at sample size n, with the
/// Hoelder modulus of `rate`. The manifold variants use rate.d_target as d_delta.
/// With `self_calibrated` the total is multiplied by C_{L,f*} (distance bound).
BoundTerms excess_bound(const NetworkDesign& design, const RateSpec& rate, const LossSpec& loss,
                        double n, const BoundConstants& constants, ExcessVariant variant,
                        bool self_calibrated = false);

/// clamp(ceil(c d_M log(d/delta) / delta^2), d_M, d - 1).
int d_delta(int d_manifold, int d, double delta, double c = 1.0);

/// Largest admissible manifold neighbourhood rho for the given C2.
double admissible_rho(double C2, std::int64_t N, std::int64_t M, int d, int d_delta_value,
                      double delta);

/// (1 - 1/p) alpha / (d_target + alpha).
double rate_exponent(const RateSpec& rate);
/// n^{(1 - 1/p) d_target / (d_target + alpha)}.
double n_star(double n, const RateSpec& rate);

/// log S2 / log S1; both sizes must exceed 1.
double ren(double size1, double size2);

/// Design size at sample size n in the design catalog:
/// DFW n*^{1/2}/log n, WFD n*/log n, DAW n*^{3/4}/log^2 n.
double catalog_size(DesignLabel label, double n, const RateSpec& rate);
/// Leading exponent s of n* in the catalog size (1/2, 1, 3/4).
double catalog_exponent(DesignLabel label);

struct RenRow {
  DesignLabel first;
  DesignLabel second;
  /// REN with sizes n*^s (log factors dropped); the asymptotic value.
  double leading = 0.0;
  /// REN with the catalog sizes including their log n factors at this n.
  double with_log_factors = 0.0;
};

/// REN(DAW, DFW), REN(DAW, WFD) and REN(DFW, WFD) at sample size n.
std::vector<RenRow> ren_catalog(double n, const RateSpec& rate);

/// The DFW, WFD or DAW design for sample size n.
NetworkDesign catalog_design(DesignLabel label, double n, const RateSpec& rate);

/// Quadratic: W = max(7d', 20), D = 12 floor(n^{(1-1/p) d'/(2d'+4 alpha)} / log n) + 14 with
/// d' = manifold_d_delta or d. Otherwise the DFW design. S uses the ambient input d.
NetworkDesign rectangle_design(double n, const RateSpec& rate, bool quadratic,
                               std::optional<int> manifold_d_delta = std::nullopt);

struct ModulusEstimate {
  /// A lower bound on the modulus: random probing cannot certify a supremum.
  double value = 0.0;
  std::string note;
};

/// max |f(x) - f(y)| over `probes` random pairs with ||x - y||_2 <= r.
ModulusEstimate estimate_modulus(const TargetFn& f, double r, int probes, PrngStream& rng);

/// Estimates for an ascending radius schedule from one probe set. Entry k is the
/// max over probes at every radius <= radii[k], so the result is nondecreasing.
std::vector<ModulusEstimate> estimate_modulus_schedule(const TargetFn& f,
                                                       const std::vector<double>& radii,
                                                       int probes, PrngStream& rng);

}  // namespace robreg::theory
