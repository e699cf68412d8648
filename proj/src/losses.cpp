// SPDX-License-Identifier: Apache-2.0
#include "robreg/losses.hpp"

#include <algorithm>
#include <cmath>

#include "robreg/error.hpp"
#include "robreg/text.hpp"

namespace robreg {

namespace {

void require_finite(double a, double y) {
  if (!std::isfinite(a) || !std::isfinite(y))
    throw InvalidArgument("loss evaluated at non-finite input");
}

double sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

LossSpec::LossSpec(LossKind kind, double hyper) : kind_(kind), hyper_(hyper) {
  switch (kind) {
    case LossKind::LS:
    case LossKind::LAD:
      hyper_ = 0.0;
      break;
    case LossKind::Quantile:
      if (!(hyper > 0.0 && hyper < 1.0))
        throw InvalidArgument("quantile level must lie in (0, 1)");
      break;
    case LossKind::Huber:
    case LossKind::Cauchy:
    case LossKind::Tukey:
      if (!(hyper > 0.0) || !std::isfinite(hyper))
        throw InvalidArgument(std::string(to_string(kind)) + " hyperparameter must be positive");
      break;
  }
}

LossSpec LossSpec::with_default_hyper(LossKind kind) {
  switch (kind) {
    case LossKind::Quantile: return quantile(0.5);
    case LossKind::Huber: return huber();
    case LossKind::Cauchy: return cauchy();
    case LossKind::Tukey: return tukey();
    default: return LossSpec(kind);
  }
}

bool LossSpec::has_hyper() const noexcept {
  return kind_ != LossKind::LS && kind_ != LossKind::LAD;
}

std::string LossSpec::label() const {
  std::string out(to_string(kind_));
  if (has_hyper()) out += "(" + text::format_double(hyper_) + ")";
  return out;
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::LS: return "ls";
    case LossKind::LAD: return "lad";
    case LossKind::Quantile: return "quantile";
    case LossKind::Huber: return "huber";
    case LossKind::Cauchy: return "cauchy";
    case LossKind::Tukey: return "tukey";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  for (auto k : {LossKind::LS, LossKind::LAD, LossKind::Quantile, LossKind::Huber,
                 LossKind::Cauchy, LossKind::Tukey}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown loss kind '" + std::string(name) + "'");
}

double loss_value(const LossSpec& spec, double a, double y) {
  require_finite(a, y);
  const double x = a - y;
  const double h = spec.hyper();
  switch (spec.kind()) {
    case LossKind::LS:
      return x * x;
    case LossKind::LAD:
      return std::abs(x);
    case LossKind::Quantile:
      return x >= 0 ? h * x : (h - 1.0) * x;
    case LossKind::Huber: {
      const double ax = std::abs(x);
      return ax <= h ? 0.5 * x * x : h * ax - 0.5 * h * h;
    }
    case LossKind::Cauchy:
      return std::log1p(h * h * x * x);
    case LossKind::Tukey: {
      if (std::abs(x) > h) return h * h / 6.0;
      const double u = 1.0 - (x / h) * (x / h);
      return h * h * (1.0 - u * u * u) / 6.0;
    }
  }
  return 0.0;
}

double loss_grad(const LossSpec& spec, double a, double y) {
  require_finite(a, y);
  const double x = a - y;
  const double h = spec.hyper();
  switch (spec.kind()) {
    case LossKind::LS:
      return 2.0 * x;
    case LossKind::LAD:
      return sign(x);
    case LossKind::Quantile:
      if (x > 0) return h;
      if (x < 0) return h - 1.0;
      return 0.0;
    case LossKind::Huber:
      return std::abs(x) < h ? x : h * sign(x);
    case LossKind::Cauchy:
      return 2.0 * h * h * x / (1.0 + h * h * x * x);
    case LossKind::Tukey: {
      if (std::abs(x) > h) return 0.0;
      const double u = 1.0 - (x / h) * (x / h);
      return x * u * u;
    }
  }
  return 0.0;
}

double lipschitz_constant(const LossSpec& spec) {
  const double h = spec.hyper();
  switch (spec.kind()) {
    case LossKind::LS:
      throw InvalidArgument("least squares loss is not globally Lipschitz");
    case LossKind::LAD:
      return 1.0;
    case LossKind::Quantile:
      return std::max(h, 1.0 - h);
    case LossKind::Huber:
      return h;
    case LossKind::Cauchy:
      return h;
    case LossKind::Tukey:
      return 16.0 * h / (25.0 * std::sqrt(5.0));
  }
  return 0.0;
}

LossAxiomReport check_loss_axioms(const LossSpec& spec,
                                  std::span<const std::pair<double, double>> probes,
                                  double tol) {
  if (probes.size() < 2) throw InvalidArgument("at least two probe points are required");
  LossAxiomReport report;
  for (const auto& [a, y] : probes) {
    if (loss_value(spec, a, a) != 0.0 || loss_value(spec, y, y) != 0.0)
      report.zero_on_diagonal = false;
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      const auto [a1, y1] = probes[i];
      const auto [a2, y2] = probes[j];
      if (a1 != a2) {
        for (double y : {y1, y2}) {
          const double r = std::abs(loss_value(spec, a1, y) - loss_value(spec, a2, y)) /
                           std::abs(a1 - a2);
          report.max_ratio = std::max(report.max_ratio, r);
        }
      }
      if (y1 != y2) {
        for (double a : {a1, a2}) {
          const double r = std::abs(loss_value(spec, a, y1) - loss_value(spec, a, y2)) /
                           std::abs(y1 - y2);
          report.max_ratio = std::max(report.max_ratio, r);
        }
      }
    }
  }
  if (spec.kind() != LossKind::LS) {
    report.lambda = lipschitz_constant(spec);
    report.lipschitz_ok = report.max_ratio <= *report.lambda * (1.0 + tol);
  }
  return report;
}

}  // namespace robreg
