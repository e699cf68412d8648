// SPDX-License-Identifier: Apache-2.0
#include "robreg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robreg/error.hpp"

namespace robreg::theory {

namespace {

double moment_factor(double p) { return std::isinf(p) ? 1.0 : 1.0 - 1.0 / p; }

std::int64_t floor_to_int(double x) {
  if (!(x >= 0.0)) return 0;
  if (x > 9.0e18) throw InvalidArgument("design parameter overflows 64-bit integers");
  return static_cast<std::int64_t>(std::floor(x));
}

}  // namespace

std::string_view to_string(DesignLabel label) {
  switch (label) {
    case DesignLabel::DFW: return "DFW";
    case DesignLabel::WFD: return "WFD";
    case DesignLabel::DAW: return "DAW";
    case DesignLabel::RectanglePlain: return "RectanglePlain";
    case DesignLabel::RectangleQuadratic: return "RectangleQuadratic";
    case DesignLabel::ShenNM: return "ShenNM";
  }
  return "?";
}

std::int64_t rectangle_size(int d, std::int64_t width, std::int64_t depth) {
  if (d < 1 || width < 1 || depth < 1) throw InvalidArgument("rectangle size needs d, W, D >= 1");
  return width * (d + 1) + (width * width + width) * (depth - 1) + width + 1;
}

NetworkDesign NetworkDesign::rectangle(DesignLabel label, int d, std::int64_t width,
                                       std::int64_t depth, double bound) {
  NetworkDesign nd;
  nd.label = label;
  nd.d = d;
  nd.W = width;
  nd.D = depth;
  nd.S = rectangle_size(d, width, depth);
  nd.U = width * depth;
  nd.B = bound;
  return nd;
}

NetworkShape NetworkDesign::shape() const {
  return NetworkShape::rectangle(d, static_cast<int>(W), static_cast<int>(D));
}

void RateSpec::validate() const {
  if (!(p > 1.0)) throw InvalidArgument("moment order p must exceed 1");
  if (!(alpha > 0.0)) throw InvalidArgument("smoothness alpha must be positive");
  if (d < 1) throw InvalidArgument("dimension d must be >= 1");
  if (!(theta >= 0.0)) throw InvalidArgument("Hoelder constant theta must be non-negative");
  if (d_target < 0) throw InvalidArgument("target dimension must be non-negative");
}

std::int64_t integer_root(std::int64_t N, int d) {
  if (N < 0 || d < 1) throw InvalidArgument("integer_root needs N >= 0, d >= 1");
  auto pow_le = [&](std::int64_t k) {
    __int128 acc = 1;
    for (int i = 0; i < d; ++i) {
      acc *= k;
      if (acc > N) return false;
    }
    return true;
  };
  auto k = static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(N), 1.0 / d)));
  while (k > 0 && !pow_le(k)) --k;
  while (pow_le(k + 1)) ++k;
  return k;
}

WidthDepth shen_width_depth(int d, std::int64_t N, std::int64_t M) {
  if (d < 1 || N < 1 || M < 1) throw InvalidArgument("shen_width_depth needs d, N, M >= 1");
  const std::int64_t w1 = 4LL * d * integer_root(N, d) + 3LL * d;
  const std::int64_t w2 = 12 * N + 8;
  return {std::max(w1, w2), 12 * M + 14};
}

NetworkDesign shen_design(int d, std::int64_t N, std::int64_t M, double bound) {
  const auto wd = shen_width_depth(d, N, M);
  auto nd = NetworkDesign::rectangle(DesignLabel::ShenNM, d, wd.W, wd.D, bound);
  nd.N = N;
  nd.M = M;
  return nd;
}

Modulus holder_modulus(double theta, double alpha) {
  return [theta, alpha](double r) { return theta * std::pow(r, alpha); };
}

double approx_error_bound(int d, std::int64_t N, std::int64_t M, const Modulus& omega,
                          ApproxVariant variant) {
  if (d < 1 || N < 1 || M < 1) throw InvalidArgument("approximation bound needs d, N, M >= 1");
  if (!omega) throw InvalidArgument("approximation bound needs a modulus of continuity");
  const double r = std::pow(static_cast<double>(N), -2.0 / d) * std::pow(static_cast<double>(M), -2.0 / d);
  const double w = omega(r);
  switch (variant) {
    case ApproxVariant::L1_19: return 19.0 * std::sqrt(static_cast<double>(d)) * w;
    case ApproxVariant::Thm2_18: return 18.0 * std::sqrt(static_cast<double>(d)) * w;
    case ApproxVariant::Quadratic384: return 384.0 * d * w * w;
  }
  throw InvalidArgument("unknown approximation variant");
}

double stochastic_error_bound(double lambda, double B, double S, double D, double n, double p,
                              double C) {
  if (!(n >= 2.0)) throw InvalidArgument("stochastic bound needs n >= 2");
  if (!(S > 1.0)) throw InvalidArgument("stochastic bound needs S > 1");
  if (!(p > 1.0)) throw InvalidArgument("stochastic bound needs p > 1 or p = inf");
  if (lambda < 0.0 || B < 0.0 || D < 0.0) throw InvalidArgument("stochastic bound needs non-negative lambda, B, D");
  const double denom = std::isinf(p) ? n : std::pow(n, 1.0 - 1.0 / p);
  return C * lambda * B * S * D * std::log(S) * std::log(n) / denom;
}

BoundTerms excess_bound(const NetworkDesign& design, const RateSpec& rate, const LossSpec& loss,
                        double n, const BoundConstants& constants, ExcessVariant variant,
                        bool self_calibrated) {
  rate.validate();
  std::vector<std::string> missing;
  const bool quadratic = variant == ExcessVariant::Quadratic || variant == ExcessVariant::ManifoldQuadratic;
  const bool manifold = variant == ExcessVariant::Manifold || variant == ExcessVariant::ManifoldQuadratic;
  if (!constants.C) missing.push_back("C");
  if (manifold && !constants.C2) missing.push_back("C2");
  if (quadratic && !constants.lambda_quad) missing.push_back("lambda_quad");
  if (self_calibrated && !constants.calibration) missing.push_back("calibration");
  if (!missing.empty()) {
    std::string msg = "missing bound constants:";
    for (const auto& m : missing) msg += " " + m;
    throw InvalidArgument(msg);
  }
  if (manifold && rate.d_target < 1) throw InvalidArgument("manifold bound needs d_delta (rate.d_target)");

  const double lambda = lipschitz_constant(loss);
  const auto omega = holder_modulus(rate.theta, rate.alpha);
  BoundTerms terms;
  terms.stochastic = stochastic_error_bound(lambda, design.B, static_cast<double>(design.S),
                                            static_cast<double>(design.D), n, rate.p, *constants.C);
  if (!manifold) {
    if (quadratic)
      terms.approximation = *constants.lambda_quad *
                            approx_error_bound(design.d, design.N, design.M, omega, ApproxVariant::Quadratic384);
    else
      terms.approximation = lambda * approx_error_bound(design.d, design.N, design.M, omega, ApproxVariant::Thm2_18);
  } else {
    const double dd = rate.d_target;
    const double nm = static_cast<double>(design.N) * static_cast<double>(design.M);
    const double r = (*constants.C2 + 1.0) * std::pow(nm, -2.0 / dd);
    const double a = (2.0 + 18.0 * std::sqrt(dd)) * omega(r);
    terms.approximation = quadratic ? *constants.lambda_quad * a * a : lambda * a;
  }
  terms.total = terms.stochastic + terms.approximation;
  if (self_calibrated) {
    terms.stochastic *= *constants.calibration;
    terms.approximation *= *constants.calibration;
    terms.total *= *constants.calibration;
  }
  return terms;
}

int d_delta(int d_manifold, int d, double delta, double c) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (d_manifold < 1 || d_manifold >= d) throw InvalidArgument("d_delta needs 1 <= d_M < d");
  if (!(c > 0.0)) throw InvalidArgument("d_delta constant must be positive");
  const double raw = std::ceil(c * d_manifold * std::log(d / delta) / (delta * delta));
  if (raw >= d - 1) return d - 1;
  return std::max(d_manifold, static_cast<int>(raw));
}

double admissible_rho(double C2, std::int64_t N, std::int64_t M, int d, int d_delta_value,
                      double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (d_delta_value < 1 || d_delta_value >= d) throw InvalidArgument("need 1 <= d_delta < d");
  const double nm = static_cast<double>(N) * static_cast<double>(M);
  return C2 * std::pow(nm, -2.0 / d_delta_value) * (1.0 - delta) /
         (2.0 * (std::sqrt(static_cast<double>(d) / d_delta_value) + 1.0 - delta));
}

double rate_exponent(const RateSpec& rate) {
  rate.validate();
  const double dt = rate.effective_dim();
  return moment_factor(rate.p) * rate.alpha / (dt + rate.alpha);
}

double n_star(double n, const RateSpec& rate) {
  rate.validate();
  const double dt = rate.effective_dim();
  return std::pow(n, moment_factor(rate.p) * dt / (dt + rate.alpha));
}

double ren(double size1, double size2) {
  if (!(size1 > 1.0) || !(size2 > 1.0)) throw InvalidArgument("REN needs network sizes > 1");
  return std::log(size2) / std::log(size1);
}

double catalog_exponent(DesignLabel label) {
  switch (label) {
    case DesignLabel::DFW: return 0.5;
    case DesignLabel::WFD: return 1.0;
    case DesignLabel::DAW: return 0.75;
    default: throw InvalidArgument("catalog sizes exist for DFW, WFD and DAW only");
  }
}

double catalog_size(DesignLabel label, double n, const RateSpec& rate) {
  const double ns = n_star(n, rate);
  const double ln = std::log(n);
  const double s = catalog_exponent(label);
  const double log_power = label == DesignLabel::DAW ? 2.0 : 1.0;
  return std::pow(ns, s) / std::pow(ln, log_power);
}

std::vector<RenRow> ren_catalog(double n, const RateSpec& rate) {
  if (!(n > 1.0)) throw InvalidArgument("REN catalog needs n > 1");
  const double log_ns = std::log(n_star(n, rate));
  std::vector<RenRow> rows;
  const std::pair<DesignLabel, DesignLabel> pairs[] = {{DesignLabel::DAW, DesignLabel::DFW},
                                                       {DesignLabel::DAW, DesignLabel::WFD},
                                                       {DesignLabel::DFW, DesignLabel::WFD}};
  for (const auto& [a, b] : pairs) {
    RenRow row{a, b};
    // log(n*^s2) / log(n*^s1)
    row.leading = (catalog_exponent(b) * log_ns) / (catalog_exponent(a) * log_ns);
    const double sa = catalog_size(a, n, rate);
    const double sb = catalog_size(b, n, rate);
    row.with_log_factors = (sa > 1.0 && sb > 1.0) ? ren(sa, sb)
                                                  : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

NetworkDesign catalog_design(DesignLabel label, double n, const RateSpec& rate) {
  rate.validate();
  if (!(n >= 3.0)) throw InvalidArgument("network designs need n >= 3");
  const int d = rate.d;
  const double ns = n_star(n, rate);
  const double ln = std::log(n);
  switch (label) {
    case DesignLabel::DFW: {
      const std::int64_t M = floor_to_int(std::sqrt(ns) / ln);
      auto nd = NetworkDesign::rectangle(label, d, std::max(7LL * d, 20LL), 12 * M + 14);
      nd.N = 1;
      nd.M = std::max<std::int64_t>(M, 1);
      return nd;
    }
    case DesignLabel::WFD: {
      const std::int64_t N = std::max<std::int64_t>(1, floor_to_int(std::sqrt(ns)));
      const std::int64_t w1 = 4LL * d * floor_to_int(std::pow(ns, 1.0 / (2.0 * d))) + 3LL * d;
      auto nd = NetworkDesign::rectangle(label, d, std::max(w1, 12 * N + 8), 26);
      nd.N = N;
      nd.M = 1;
      return nd;
    }
    case DesignLabel::DAW: {
      const std::int64_t K = std::max<std::int64_t>(1, floor_to_int(std::pow(ns, 0.25) / std::sqrt(ln)));
      auto nd = shen_design(d, K, K);
      nd.label = label;
      return nd;
    }
    default:
      throw InvalidArgument("catalog designs are DFW, WFD and DAW");
  }
}

NetworkDesign rectangle_design(double n, const RateSpec& rate, bool quadratic,
                               std::optional<int> manifold_d_delta) {
  rate.validate();
  if (!(n >= 3.0)) throw InvalidArgument("rectangle design needs n >= 3");
  if (!quadratic) {
    if (manifold_d_delta) {
      RateSpec r = rate;
      r.d_target = *manifold_d_delta;
      auto nd = catalog_design(DesignLabel::DFW, n, r);
      nd.W = std::max(7LL * *manifold_d_delta, 20LL);
      nd.S = rectangle_size(rate.d, nd.W, nd.D);
      nd.U = nd.W * nd.D;
      return nd;
    }
    return catalog_design(DesignLabel::DFW, n, rate);
  }
  const int dp = manifold_d_delta.value_or(rate.d);
  if (dp < 1) throw InvalidArgument("d_delta must be >= 1");
  const double expo = moment_factor(rate.p) * dp / (2.0 * dp + 4.0 * rate.alpha);
  const std::int64_t M = floor_to_int(std::pow(n, expo) / std::log(n));
  auto nd = NetworkDesign::rectangle(DesignLabel::RectangleQuadratic, rate.d,
                                     std::max(7LL * dp, 20LL), 12 * M + 14);
  nd.N = 1;
  nd.M = std::max<std::int64_t>(M, 1);
  return nd;
}

namespace {

struct Probe {
  std::vector<double> x;
  std::vector<double> dir;
  double scale;
};

std::vector<Probe> draw_probes(int d, int probes, PrngStream& rng) {
  std::vector<Probe> out(static_cast<std::size_t>(probes));
  for (auto& p : out) {
    p.x.resize(static_cast<std::size_t>(d));
    p.dir.resize(static_cast<std::size_t>(d));
    for (auto& xi : p.x) xi = rng.uniform();
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& di : p.dir) {
        di = rng.normal();
        norm += di * di;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& di : p.dir) di /= norm;
    p.scale = rng.uniform();
  }
  return out;
}

double probe_gap(const TargetFn& f, const Probe& p, double r, std::vector<double>& y) {
  for (std::size_t j = 0; j < p.x.size(); ++j)
    y[j] = std::clamp(p.x[j] + p.scale * r * p.dir[j], 0.0, 1.0);
  return std::abs(f(p.x) - f(y));
}

std::string modulus_note(const TargetFn& f) {
  std::string note = "lower bound from random probing";
  if (!f.uniformly_continuous()) note += "; warning: target is not uniformly continuous";
  return note;
}

}  // namespace

std::vector<ModulusEstimate> estimate_modulus_schedule(const TargetFn& f,
                                                       const std::vector<double>& radii,
                                                       int probes, PrngStream& rng) {
  if (probes < 1) throw InvalidArgument("modulus estimate needs at least one probe");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] >= 0.0)) throw InvalidArgument("modulus radius must be non-negative");
    if (k > 0 && radii[k] < radii[k - 1]) throw InvalidArgument("radius schedule must be ascending");
  }
  const auto probe_set = draw_probes(f.dim(), probes, rng);
  std::vector<double> y(static_cast<std::size_t>(f.dim()));
  std::vector<ModulusEstimate> out;
  double running = 0.0;
  const std::string note = modulus_note(f);
  for (double r : radii) {
    for (const auto& p : probe_set) running = std::max(running, probe_gap(f, p, r, y));
    out.push_back({running, note});
  }
  return out;
}

ModulusEstimate estimate_modulus(const TargetFn& f, double r, int probes, PrngStream& rng) {
  return estimate_modulus_schedule(f, {r}, probes, rng).front();
}

}  // namespace robreg::theory
