// SPDX-License-Identifier: Apache-2.0
//
// Robust regression losses L(a, y) = psi(a - y) with their subgradients in the
// first argument and global Lipschitz constants.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace robreg {

enum class LossKind { LS, LAD, Quantile, Huber, Cauchy, Tukey };

/// A loss kind together with its hyperparameter. The hyperparameter is the
/// quantile level tau for Quantile, zeta for Huber, kappa for Cauchy and the
/// cutoff t for Tukey; it is ignored (stored as 0) for LS and LAD.
class LossSpec {
 public:
  /// Throws InvalidArgument if `hyper` is outside the admissible range.
  LossSpec(LossKind kind, double hyper = 0.0);

  static LossSpec ls() { return LossSpec(LossKind::LS); }
  static LossSpec lad() { return LossSpec(LossKind::LAD); }
  static LossSpec quantile(double tau) { return LossSpec(LossKind::Quantile, tau); }
  static LossSpec huber(double zeta = 1.345) { return LossSpec(LossKind::Huber, zeta); }
  static LossSpec cauchy(double kappa = 1.0) { return LossSpec(LossKind::Cauchy, kappa); }
  static LossSpec tukey(double t = 4.685) { return LossSpec(LossKind::Tukey, t); }

  /// The experiment defaults: Huber 1.345, Cauchy 1, Tukey 4.685, Quantile 0.5.
  static LossSpec with_default_hyper(LossKind kind);

  LossKind kind() const noexcept { return kind_; }
  double hyper() const noexcept { return hyper_; }
  bool has_hyper() const noexcept;

  /// "ls", "huber(1.345)", ...
  std::string label() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;

 private:
  LossKind kind_;
  double hyper_;
};

std::string_view to_string(LossKind kind);
/// Parses the lowercase config names "ls", "lad", "quantile", "huber", "cauchy", "tukey".
LossKind parse_loss_kind(std::string_view name);

/// L(a, y). LS is the plain squared error (a - y)^2.
double loss_value(const LossSpec& spec, double a, double y);

/// dL/da. Kink selections: LAD and Quantile return 0 at a == y; Huber returns
/// zeta * sign(a - y) at |a - y| == zeta.
double loss_grad(const LossSpec& spec, double a, double y);

/// Global Lipschitz constant. Throws InvalidArgument for LS.
double lipschitz_constant(const LossSpec& spec);

struct LossAxiomReport {
  /// Largest finite-difference slope seen in either argument over probe pairs.
  double max_ratio = 0.0;
  /// Lipschitz constant of the loss; empty for LS.
  std::optional<double> lambda;
  /// max_ratio <= lambda * (1 + tol); false for LS.
  bool lipschitz_ok = false;
  /// L(a, a) == 0 held at every probe.
  bool zero_on_diagonal = true;
};

/// Empirically checks continuity/Lipschitz axioms on probe points (a, y).
/// Requires at least two probes.
LossAxiomReport check_loss_axioms(const LossSpec& spec,
                                  std::span<const std::pair<double, double>> probes,
                                  double tol = 1e-3);

}  // namespace robreg
