// SPDX-License-Identifier: Apache-2.0
#include "robreg/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "robreg/error.hpp"
#include "robreg/text.hpp"

namespace robreg {

namespace {

constexpr int kGrid = 1000;
constexpr double kWidth = 800, kHeight = 500, kMargin = 50;
constexpr std::array<const char*, 8> kPalette{"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const {
    y = std::clamp(y, y0, y1);
    return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin);
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_svg(std::ostringstream& os, const Frame& f, const std::string& xlabel,
              const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
     << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& s, const char* anchor) {
    os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"12\" text-anchor=\""
       << anchor << "\">" << escape(s) << "</text>\n";
  };
  label(kMargin, kHeight - kMargin + 16, text::format_double(f.x0), "middle");
  label(kWidth - kMargin, kHeight - kMargin + 16, text::format_double(f.x1), "middle");
  label(kMargin - 4, kHeight - kMargin, num(f.y0), "end");
  label(kMargin - 4, kMargin + 4, num(f.y1), "end");
  label(kWidth / 2, kHeight - 12, xlabel, "middle");
  label(14, kHeight / 2, ylabel, "middle");
}

void polyline(std::ostringstream& os, const Frame& f, const std::vector<double>& xs,
              const std::vector<double>& ys, const char* colour, double width) {
  os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << width
     << "\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    os << num(f.px(xs[i])) << ',' << num(f.py(ys[i])) << ' ';
  }
  os << "\"/>\n";
}

void legend(std::ostringstream& os, std::size_t slot, const std::string& name, const char* colour) {
  const double y = kMargin + 16 + 16 * static_cast<double>(slot);
  os << "<line x1=\"" << kWidth - kMargin - 150 << "\" y1=\"" << y - 4 << "\" x2=\""
     << kWidth - kMargin - 130 << "\" y2=\"" << y - 4 << "\" stroke=\"" << colour
     << "\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << kWidth - kMargin - 125 << "\" y=\"" << y
     << "\" font-size=\"12\">" << escape(name) << "</text>\n";
}

}  // namespace

std::string render_fit_svg(const std::vector<FitCurve>& fits, const TargetFn& target,
                           const Dataset& data) {
  if (target.dim() != 1 || data.dim() != 1) throw InvalidArgument("fit plot: univariate only");
  std::vector<double> grid(kGrid), truth(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = static_cast<double>(i) / (kGrid - 1);
    truth[i] = target(std::span<const double>(&grid[i], 1));
  }
  std::vector<std::vector<double>> curves;
  for (const auto& fit : fits) {
    if (fit.model.layers().front().weight.cols() != 1)
      throw InvalidArgument("fit plot: univariate only");
    std::vector<double> c(kGrid);
    for (int i = 0; i < kGrid; ++i) c[i] = forward(fit.model, std::span<const double>(&grid[i], 1));
    curves.push_back(std::move(c));
  }

  double lo = *std::min_element(truth.begin(), truth.end());
  double hi = *std::max_element(truth.begin(), truth.end());
  if (data.size() > 0) {
    std::vector<double> ys(data.ys.data(), data.ys.data() + data.size());
    std::sort(ys.begin(), ys.end());
    const auto q = [&](double p) {
      return ys[static_cast<std::size_t>(std::floor(p * static_cast<double>(ys.size() - 1)))];
    };
    lo = std::min(lo, q(0.01));
    hi = std::max(hi, q(0.99));
  }
  const double span = std::max(hi - lo, 1e-9);
  for (const auto& c : curves)
    for (double v : c)
      if (std::isfinite(v)) {
        lo = std::min(lo, std::max(v, lo - span));
        hi = std::max(hi, std::min(v, hi + span));
      }
  const double pad = 0.05 * std::max(hi - lo, 1e-9);
  const Frame f{0.0, 1.0, lo - pad, hi + pad};

  std::ostringstream os;
  open_svg(os, f, "x", "y");
  for (int i = 0; i < data.size(); ++i)
    os << "<circle cx=\"" << num(f.px(data.xs(i, 0))) << "\" cy=\"" << num(f.py(data.ys(i)))
       << "\" r=\"1.5\" fill=\"#999999\"/>\n";
  polyline(os, f, grid, truth, "black", 2.0);
  legend(os, 0, "f0", "black");
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const char* colour = kPalette[k % kPalette.size()];
    polyline(os, f, grid, curves[k], colour, 1.5);
    legend(os, k + 1, fits[k].label, colour);
  }
  os << "</svg>\n";
  return os.str();
}

void emit_fit_svg(const std::vector<FitCurve>& fits, const TargetFn& target, const Dataset& data,
                  const std::string& path) {
  text::write_file(path, render_fit_svg(fits, target, data));
}

std::string render_trace_svg(const std::vector<TraceCurve>& traces) {
  if (traces.empty()) throw InvalidArgument("trace plot: no traces");
  bool positive = true;
  std::size_t epochs = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& t : traces) {
    epochs = std::max(epochs, t.trace.epoch_loss.size());
    for (double v : t.trace.epoch_loss) {
      if (!std::isfinite(v)) continue;
      positive = positive && v > 0.0;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (epochs == 0 || !std::isfinite(lo)) throw InvalidArgument("trace plot: empty traces");
  auto tf = [&](double v) { return positive ? std::log10(v) : v; };
  lo = tf(lo);
  hi = tf(hi);
  const double pad = 0.05 * std::max(hi - lo, 1e-9);
  const Frame f{1.0, std::max<double>(2.0, static_cast<double>(epochs)), lo - pad, hi + pad};

  std::ostringstream os;
  open_svg(os, f, "epoch", positive ? "log10 training loss" : "training loss");
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& loss = traces[k].trace.epoch_loss;
    std::vector<double> xs(loss.size()), ys(loss.size());
    for (std::size_t e = 0; e < loss.size(); ++e) {
      xs[e] = static_cast<double>(e + 1);
      ys[e] = std::isfinite(loss[e]) ? tf(loss[e]) : loss[e];
    }
    const char* colour = kPalette[k % kPalette.size()];
    polyline(os, f, xs, ys, colour, 1.5);
    legend(os, k, traces[k].label, colour);
  }
  os << "</svg>\n";
  return os.str();
}

void emit_trace_svg(const std::vector<TraceCurve>& traces, const std::string& path) {
  text::write_file(path, render_trace_svg(traces));
}

}  // namespace robreg
