// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: robreg_acceptance [criterion numbers...]  (default: all)
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "robreg/harness.hpp"
#include "robreg/theory.hpp"
#include "support/oracles.hpp"

using namespace robreg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Desk-scale protocol: Nets-256, n=512, epochs 600, R=5, T=1e4.
ExperimentConfig desk(TargetKind target, NoiseModel noise, std::vector<LossSpec> train) {
  ExperimentConfig cfg;
  cfg.target = TargetFn::dj(target);
  cfg.noises = {noise};
  cfg.train_losses = std::move(train);
  cfg.test_losses = {LossSpec::ls(), LossSpec::lad(), LossSpec::huber(), LossSpec::cauchy(),
                     LossSpec::tukey()};
  cfg.ns = {512};
  cfg.test_size = 10000;
  cfg.replications = 5;
  cfg.train.epochs = 600;
  cfg.seed = 2021;
  return cfg;
}

const CellResult& cell_for(const Report& r, const LossSpec& loss) {
  for (const auto& c : r.cells)
    if (c.train_loss == loss) return c;
  throw std::runtime_error("no cell for " + loss.label());
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string divergence_note(const Report& r) {
  return r.total_divergences() ? ", divergences=" + std::to_string(r.total_divergences()) : "";
}

// 1 ------------------------------------------------------------------------
Outcome gradient_oracle() {
  PrngStream rng(20211);
  const std::vector<LossSpec> losses{LossSpec::ls(), LossSpec::huber(1.345), LossSpec::cauchy(1.0),
                                     LossSpec::tukey(4.685)};
  int checked = 0, failures = 0, skipped = 0;
  double worst = 0.0;
  for (int net = 0; net < 20; ++net) {
    const int d = static_cast<int>(rng.below(3)) + 1;
    std::vector<int> widths{d};
    const int hidden = static_cast<int>(rng.below(2)) + 1;
    for (int h = 0; h < hidden; ++h) widths.push_back(static_cast<int>(rng.below(8)) + 1);
    widths.push_back(1);
    const MlpParams params = init_network(NetworkShape(widths), rng);
    const int m = static_cast<int>(rng.below(16)) + 1;
    Eigen::MatrixXd xs(d, m);
    std::vector<double> ys(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) {
      for (int r = 0; r < d; ++r) xs(r, c) = rng.uniform();
      ys[static_cast<std::size_t>(c)] = rng.uniform(-3, 3);
    }
    for (const auto& loss : losses) {
      const BackwardResult b = backward(params, xs, ys, loss);
      const auto rep = oracle::check_gradients(params, b.grads, xs, ys, loss);
      checked += rep.checked;
      failures += rep.failures;
      skipped += rep.skipped_at_kinks;
      worst = std::max(worst, rep.worst_excess);
    }
  }
  // A kink crossing makes the central difference meaningless; allow a handful, not a habit.
  const bool ok = failures == 0 && skipped * 100 <= checked;
  return {ok, std::to_string(checked) + " gradients, " + std::to_string(failures) + " mismatches, " +
                  std::to_string(skipped) + " skipped at ReLU/Huber kinks"};
}

// 2 ------------------------------------------------------------------------
Outcome loss_table() {
  std::vector<std::string> bad;
  auto expect = [&](const LossSpec& l, double v) {
    if (std::abs(lipschitz_constant(l) - v) > 1e-12 * std::max(1.0, v)) bad.push_back(l.label());
  };
  expect(LossSpec::lad(), 1.0);
  for (double tau : {0.1, 0.25, 0.5, 0.9}) expect(LossSpec::quantile(tau), std::max(tau, 1 - tau));
  for (double z : {0.5, 1.0, 1.345}) expect(LossSpec::huber(z), z);
  for (double k : {0.5, 1.0, 2.0}) expect(LossSpec::cauchy(k), k);
  for (double t : {1.0, 4.685}) expect(LossSpec::tukey(t), 16 * t / (25 * std::sqrt(5.0)));

  double worst_ratio = 0.0;
  for (const auto& l : {LossSpec::lad(), LossSpec::quantile(0.3), LossSpec::huber(), LossSpec::cauchy(),
                        LossSpec::tukey()}) {
    const double lam = lipschitz_constant(l);
    for (double y : {-2.0, 0.0, 1.5})
      for (int i = 0; i < 2000; ++i) {
        const double a1 = -10 + 20.0 * i / 2000, a2 = a1 + 1e-3;
        const double slope = std::abs(loss_value(l, a1, y) - loss_value(l, a2, y)) / 1e-3;
        worst_ratio = std::max(worst_ratio, slope / lam);
      }
  }
  const bool ok = bad.empty() && worst_ratio <= 1 + 1e-3;
  std::string detail = "max probe slope / lambda = " + fmt(worst_ratio);
  for (const auto& b : bad) detail += ", mismatch " + b;
  return {ok, detail};
}

// 3 ------------------------------------------------------------------------
Outcome structural() {
  PrngStream rng(20213);
  int mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<int> widths{static_cast<int>(rng.below(12)) + 1};
    const int hidden = static_cast<int>(rng.below(6));
    for (int h = 0; h < hidden; ++h) widths.push_back(static_cast<int>(rng.below(300)) + 1);
    widths.push_back(1);
    const NetworkShape s(widths);
    if (s.param_count() != oracle::enumerate_params(s)) ++mismatches;
  }
  const auto wd = theory::shen_width_depth(1, 1, 1);
  theory::RateSpec r;
  r.p = kInf;
  r.alpha = 1;
  r.d = 1;
  const auto wfd = theory::catalog_design(theory::DesignLabel::WFD, 1e6, r);
  std::vector<std::int64_t> widths;
  for (int d : {1, 2, 3, 10}) {
    r.d = d;
    widths.push_back(theory::rectangle_design(1e6, r, true).W);
  }
  const bool ok = mismatches == 0 && wd.W == 20 && wd.D == 26 && wfd.D == 26 &&
                  widths == std::vector<std::int64_t>{20, 20, 21, 70};
  return {ok, std::to_string(mismatches) + " size mismatches, shen(1,1,1)=(" + std::to_string(wd.W) + "," +
                  std::to_string(wd.D) + "), WFD D=" + std::to_string(wfd.D) + ", W(d=1,2,3,10)=" +
                  std::to_string(widths[0]) + "," + std::to_string(widths[1]) + "," +
                  std::to_string(widths[2]) + "," + std::to_string(widths[3])};
}

// 4 ------------------------------------------------------------------------
Outcome ren_asymptotics() {
  bool ok = true;
  std::string detail;
  for (double p : {2.0, kInf})
    for (int d : {1, 4}) {
      theory::RateSpec r;
      r.p = p;
      r.alpha = 1;
      r.d = d;
      const auto rows = theory::ren_catalog(1e12, r);
      const double daw_dfw = rows[0].leading, daw_wfd = rows[1].leading;
      ok = ok && std::abs(daw_dfw - 2.0 / 3) <= 0.05 && std::abs(daw_wfd - 4.0 / 3) <= 0.05;
      if (detail.empty()) detail = "DAW/DFW=" + fmt(daw_dfw) + ", DAW/WFD=" + fmt(daw_wfd);
    }
  return {ok, detail + " (p in {2, inf}, d in {1, 4})"};
}

// 5, 10 --------------------------------------------------------------------
std::string g_criterion5_csv;

ExperimentConfig criterion5_config() {
  return desk(TargetKind::Blocks, NoiseModel::mixture(0.8, 100.0), {LossSpec::ls(), LossSpec::huber()});
}

Outcome contamination() {
  const Report r = run_table(criterion5_config(), 1);
  g_criterion5_csv = report_csv(r);
  const double ls = cell_for(r, LossSpec::ls()).test(LossKind::LS).mean;
  const double hu = cell_for(r, LossSpec::huber()).test(LossKind::LS).mean;
  const double ratio = ls / hu;
  return {ratio >= 3.0, "LS-trained " + fmt(ls) + " vs Huber-trained " + fmt(hu) + ", ratio " + fmt(ratio) +
                            divergence_note(r)};
}

Outcome determinism() {
  if (g_criterion5_csv.empty()) g_criterion5_csv = report_csv(run_table(criterion5_config(), 1));
  const std::string again = report_csv(run_table(criterion5_config(), 4));
  return {again == g_criterion5_csv, again == g_criterion5_csv ? "threads 1 and 4 reports are identical"
                                                               : "reports differ between threads 1 and 4"};
}

// 6 ------------------------------------------------------------------------
Outcome normal_sanity() {
  const std::vector<LossSpec> five{LossSpec::ls(), LossSpec::lad(), LossSpec::huber(), LossSpec::cauchy(),
                                   LossSpec::tukey()};
  const Report r = run_table(desk(TargetKind::Blocks, NoiseModel::normal(), five), 1);
  double best = kInf;
  std::string detail;
  for (const auto& l : five) {
    const double v = cell_for(r, l).test(LossKind::LS).mean;
    best = std::min(best, v);
    detail += (detail.empty() ? "" : ", ") + l.label() + "=" + fmt(v);
  }
  const double ls = cell_for(r, LossSpec::ls()).test(LossKind::LS).mean;
  return {ls <= 2 * best, "LS-tested means: " + detail + divergence_note(r)};
}

// 7 ------------------------------------------------------------------------
Outcome cauchy_robustness() {
  const Report r = run_table(
      desk(TargetKind::Doppler, NoiseModel::cauchy(), {LossSpec::ls(), LossSpec::lad()}), 1);
  const double ls = median(cell_for(r, LossSpec::ls()).test(LossKind::LS).excess_values);
  const double lad = median(cell_for(r, LossSpec::lad()).test(LossKind::LS).excess_values);
  return {lad < ls, "median LS-tested excess: LAD-trained " + fmt(lad) + " vs LS-trained " + fmt(ls) +
                        divergence_note(r)};
}

// 8 ------------------------------------------------------------------------
Outcome convergence() {
  ExperimentConfig cfg = desk(TargetKind::Heavisine, NoiseModel::student_t2(), {LossSpec::huber()});
  cfg.test_losses = {LossSpec::huber()};
  const SweepResult s = convergence_sweep(cfg, NoiseModel::student_t2(), LossSpec::huber(), {128, 512}, 1);
  const double a = s.cells[0].test(LossKind::Huber).mean;
  const double b = s.cells[1].test(LossKind::Huber).mean;
  return {b < a, "Huber/Huber excess n=128: " + fmt(a) + ", n=512: " + fmt(b)};
}

// 9 ------------------------------------------------------------------------
Outcome oracle_zero() {
  std::vector<TargetFn> targets;
  for (auto k : {TargetKind::Blocks, TargetKind::Bumps, TargetKind::Heavisine, TargetKind::Doppler})
    targets.push_back(TargetFn::dj(k));
  for (int d : {1, 2, 4}) targets.push_back(TargetFn::ka(d, ka_indices(d, 2021), 2021));
  const std::vector<NoiseModel> noises{NoiseModel::normal(), NoiseModel::student_t2(), NoiseModel::cauchy(),
                                       NoiseModel::mixture()};
  const std::vector<LossSpec> losses{LossSpec::ls(), LossSpec::lad(), LossSpec::huber(), LossSpec::cauchy(),
                                     LossSpec::tukey()};
  double worst = 0.0;
  int combos = 0;
  ExperimentConfig cfg;
  for (const auto& f : targets) {
    cfg.target = f;
    for (const auto& noise : noises) {
      auto s = replication_streams(cfg, noise, 512, 0);
      const Dataset test = make_dataset(f, noise, 10000, s.test);
      const Eigen::VectorXd f0 = f.eval_rows(test.xs);
      const std::span<const double> pf(f0.data(), static_cast<std::size_t>(f0.size()));
      const std::span<const double> py(test.ys.data(), static_cast<std::size_t>(test.ys.size()));
      worst = std::max(worst, std::abs(delta2_metric(pf, pf)));
      for (const auto& l : losses) {
        worst = std::max(worst, std::abs(excess_risk(pf, pf, py, l)));
        ++combos;
      }
    }
  }
  return {worst <= 1e-12, std::to_string(combos) + " combinations, max |value| = " + fmt(worst)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "gradient oracle", gradient_oracle},
      {2, "loss table exactness", loss_table},
      {3, "structural formulas", structural},
      {4, "REN asymptotics", ren_asymptotics},
      {5, "robustness under contamination", contamination},
      {6, "normal-noise sanity", normal_sanity},
      {7, "Cauchy-noise robustness", cauchy_robustness},
      {8, "convergence direction", convergence},
      {9, "oracle zero", oracle_zero},
      {10, "determinism across thread counts", determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s  %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
