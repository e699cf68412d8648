// SPDX-License-Identifier: Apache-2.0
#include "robreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "robreg/error.hpp"
#include "robreg/text.hpp"

namespace robreg {

namespace {

constexpr int kPredictChunk = 4096;

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw InvalidArgument(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
  if (a == 0) throw InvalidArgument(std::string(what) + ": empty test set");
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::string noise_key(const NoiseModel& noise) {
  std::string key = noise.name();
  if (noise.kind == NoiseKind::Mixture)
    key += "(" + text::format_double(noise.xi) + "," + text::format_double(noise.sd2) + ")";
  return key;
}

std::string canonical(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "target=" << cfg.target.name() << ";d=" << cfg.target.dim()
     << ";inputs=" << cfg.inputs.describe() << ";noises=";
  for (const auto& n : cfg.noises) os << noise_key(n) << ' ';
  os << ";train=";
  for (const auto& l : cfg.train_losses) os << l.label() << ' ';
  os << ";test=";
  for (const auto& l : cfg.test_losses) os << l.label() << ' ';
  os << ";n=";
  for (int n : cfg.ns) os << n << ' ';
  os << ";T=" << cfg.test_size << ";R=" << cfg.replications << ";hidden=";
  for (int w : cfg.hidden) os << w << ' ';
  const auto& t = cfg.train;
  os << ";lr=" << text::format_double(t.learning_rate) << ";b1=" << text::format_double(t.beta1)
     << ";b2=" << text::format_double(t.beta2) << ";eps=" << text::format_double(t.eps)
     << ";epochs=" << t.epochs << ";batch=" << text::format_double(t.batch_fraction)
     << ";shuffle=" << t.shuffle << ";seed=" << cfg.seed << ";clamp=" << cfg.clamp_eval << ':'
     << text::format_double(cfg.clamp_bound) << ";excess=" << cfg.excess;
  return os.str();
}

struct ReplicationOutcome {
  bool diverged = false;
  std::string message;
  std::vector<double> excess;  // per test loss
  std::vector<double> raw;
  double delta2 = 0.0;
};

ReplicationOutcome run_replication(const ExperimentConfig& cfg, const NetworkShape& shape,
                                   const NoiseModel& noise, const LossSpec& train_loss, int n,
                                   int r) {
  auto streams = replication_streams(cfg, noise, n, r);
  const Dataset data = make_dataset(cfg.target, noise, n, streams.data, cfg.inputs);
  const Dataset test = make_dataset(cfg.target, noise, cfg.test_size, streams.test, cfg.inputs);
  ReplicationOutcome out;
  TrainResult fit = [&]() -> TrainResult {
    try {
      return train(data, shape, train_loss, cfg.train, streams.init);
    } catch (const DivergenceError& e) {
      out.diverged = true;
      out.message = e.what();
      return {MlpParams(shape), {}};
    }
  }();
  if (out.diverged) return out;

  const std::optional<double> clamp =
      cfg.clamp_eval ? std::optional<double>(cfg.clamp_bound) : std::nullopt;
  const Eigen::VectorXd pred = predict(fit.params, test.xs, clamp);
  if (!pred.allFinite()) {
    out.diverged = true;
    out.message = "non-finite test prediction";
    return out;
  }
  const Eigen::VectorXd f0 = cfg.target.eval_rows(test.xs);
  for (const auto& loss : cfg.test_losses) {
    const double raw = testing_risk(as_span(pred), as_span(test.ys), loss);
    const double base = testing_risk(as_span(f0), as_span(test.ys), loss);
    out.raw.push_back(raw);
    out.excess.push_back(raw - base);
  }
  out.delta2 = delta2_metric(as_span(pred), as_span(f0));
  return out;
}

CellResult aggregate(const ExperimentConfig& cfg, const NoiseModel& noise,
                     const LossSpec& train_loss, int n,
                     const std::vector<ReplicationOutcome>& reps) {
  CellResult cell;
  cell.target = cfg.target.name();
  cell.noise = noise;
  cell.train_loss = train_loss;
  cell.n = n;
  cell.replications = static_cast<int>(reps.size());
  for (std::size_t r = 0; r < reps.size(); ++r) {
    cell.status.push_back({static_cast<int>(r), reps[r].diverged, reps[r].message});
    if (reps[r].diverged) ++cell.divergences;
  }
  if (cell.divergences == cell.replications) {
    cell.missing = true;
    cell.error = "all " + std::to_string(cell.replications) + " replications diverged";
    if (!reps.empty()) cell.error += ": " + reps.front().message;
    for (const auto& loss : cfg.test_losses) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      cell.tests.push_back({loss, nan, nan, nan, nan, {}, {}});
    }
    return cell;
  }
  for (std::size_t k = 0; k < cfg.test_losses.size(); ++k) {
    TestLossStats s{cfg.test_losses[k], 0.0, 0.0, 0.0, 0.0, {}, {}};
    for (const auto& rep : reps) {
      if (rep.diverged) continue;
      s.excess_values.push_back(rep.excess[k]);
      s.raw_values.push_back(rep.raw[k]);
    }
    const auto [em, es] = mean_sd(s.excess_values);
    const auto [rm, rs] = mean_sd(s.raw_values);
    s.mean = cfg.excess ? em : rm;
    s.sd = cfg.excess ? es : rs;
    s.raw_mean = rm;
    s.raw_sd = rs;
    cell.tests.push_back(std::move(s));
  }
  for (const auto& rep : reps)
    if (!rep.diverged) cell.delta2_values.push_back(rep.delta2);
  return cell;
}

struct CellKey {
  const NoiseModel* noise;
  const LossSpec* loss;
  int n;
};

}  // namespace

NetworkShape ExperimentConfig::shape() const {
  std::vector<int> widths;
  widths.push_back(target.dim());
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  return NetworkShape(widths);
}

void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  auto guard = [&](const std::string& where, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      problems.push_back(where + ": " + e.what());
    }
  };
  if (noises.empty()) problems.push_back("noises: list is empty");
  if (train_losses.empty()) problems.push_back("train_losses: list is empty");
  if (test_losses.empty()) problems.push_back("test_losses: list is empty");
  if (ns.empty()) problems.push_back("n: list is empty");
  for (int n : ns)
    if (n < 1) problems.push_back("n: sample size " + std::to_string(n) + " must be >= 1");
  if (test_size < 1) problems.push_back("test_size: must be >= 1");
  if (replications < 1) problems.push_back("replications: must be >= 1");
  for (int w : hidden)
    if (w < 1) problems.push_back("hidden: widths must be >= 1");
  if (clamp_eval && !(clamp_bound > 0.0)) problems.push_back("clamp_bound: must be positive");
  for (const auto& noise : noises) guard("noise " + noise.name(), [&] { noise.validate(); });
  guard("train", [&] { train.validate(); });
  if (inputs.kind == InputDesign::Kind::Manifold) {
    if (inputs.d_manifold < 1 || inputs.d_manifold >= target.dim())
      problems.push_back("inputs.d_manifold: must satisfy 1 <= d_M < d");
    if (inputs.rho < 0.0 || inputs.rho >= 1.0) problems.push_back("inputs.rho: must be in [0, 1)");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

double testing_risk(std::span<const double> predictions, std::span<const double> ys,
                    const LossSpec& loss) {
  check_sizes(predictions.size(), ys.size(), "testing_risk");
  double acc = 0.0;
  for (std::size_t t = 0; t < ys.size(); ++t) acc += loss_value(loss, predictions[t], ys[t]);
  return acc / static_cast<double>(ys.size());
}

Eigen::VectorXd predict(const MlpParams& model, const Eigen::MatrixXd& xs,
                        std::optional<double> clamp) {
  const int d = model.layers().front().weight.cols();
  if (xs.cols() != d)
    throw InvalidArgument("predict: inputs have " + std::to_string(xs.cols()) +
                          " columns, model expects " + std::to_string(d));
  const Eigen::Index T = xs.rows();
  Eigen::VectorXd out(T);
  for (Eigen::Index start = 0; start < T; start += kPredictChunk) {
    const Eigen::Index len = std::min<Eigen::Index>(kPredictChunk, T - start);
    const Eigen::MatrixXd chunk = xs.middleRows(start, len).transpose();
    out.segment(start, len) = forward_batch(model, chunk).transpose();
  }
  if (clamp) out = out.cwiseMax(-*clamp).cwiseMin(*clamp);
  return out;
}

double testing_risk(const MlpParams& model, const Eigen::MatrixXd& xs, std::span<const double> ys,
                    const LossSpec& loss) {
  check_sizes(static_cast<std::size_t>(xs.rows()), ys.size(), "testing_risk");
  const Eigen::VectorXd pred = predict(model, xs);
  return testing_risk(as_span(pred), ys, loss);
}

double excess_risk(std::span<const double> predictions, std::span<const double> f0_values,
                   std::span<const double> ys, const LossSpec& loss) {
  check_sizes(f0_values.size(), ys.size(), "excess_risk");
  return testing_risk(predictions, ys, loss) - testing_risk(f0_values, ys, loss);
}

double excess_risk(const MlpParams& model, const TargetFn& target, const Eigen::MatrixXd& xs,
                   std::span<const double> ys, const LossSpec& loss) {
  check_sizes(static_cast<std::size_t>(xs.rows()), ys.size(), "excess_risk");
  const Eigen::VectorXd pred = predict(model, xs);
  const Eigen::VectorXd f0 = target.eval_rows(xs);
  return excess_risk(as_span(pred), as_span(f0), ys, loss);
}

double delta2_metric(std::span<const double> predictions, std::span<const double> f0_values) {
  check_sizes(predictions.size(), f0_values.size(), "delta2_metric");
  double acc = 0.0;
  for (std::size_t t = 0; t < predictions.size(); ++t) {
    const double e = std::abs(predictions[t] - f0_values[t]);
    acc += std::min(e, e * e);
  }
  return acc / static_cast<double>(predictions.size());
}

double delta2_metric(const MlpParams& model, const TargetFn& target, const Eigen::MatrixXd& xs) {
  const Eigen::VectorXd pred = predict(model, xs);
  const Eigen::VectorXd f0 = target.eval_rows(xs);
  return delta2_metric(as_span(pred), as_span(f0));
}

const TestLossStats& CellResult::test(LossKind kind) const {
  for (const auto& t : tests)
    if (t.loss.kind() == kind) return t;
  throw InvalidArgument("cell has no test loss '" + std::string(to_string(kind)) + "'");
}

int Report::total_divergences() const {
  int total = 0;
  for (const auto& c : cells) total += c.divergences;
  return total;
}

bool Report::complete() const {
  return std::none_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.missing; });
}

ReplicationStreams replication_streams(const ExperimentConfig& cfg, const NoiseModel& noise, int n,
                                       int replication) {
  const PrngStream root(cfg.seed);
  const std::string key = cfg.target.name() + "|" + std::to_string(cfg.target.dim()) + "|" +
                          cfg.inputs.describe() + "|" + noise_key(noise) + "|n=" +
                          std::to_string(n);
  const PrngStream rep = root.substream(key).substream(static_cast<std::uint64_t>(replication));
  return {rep.substream("data"), rep.substream("test"), rep.substream("init")};
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::size_t first_index = count;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::pair<double, double> mean_sd(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("mean_sd: no values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::string_view code_version() { return "robreg 0.1.0"; }

CellResult run_cell(const ExperimentConfig& cfg, const NoiseModel& noise, const LossSpec& train_loss,
                    int n, int threads) {
  cfg.validate();
  const NetworkShape shape = cfg.shape();
  std::vector<ReplicationOutcome> reps(static_cast<std::size_t>(cfg.replications));
  parallel_for(reps.size(), threads, [&](std::size_t r) {
    reps[r] = run_replication(cfg, shape, noise, train_loss, n, static_cast<int>(r));
  });
  CellResult cell = aggregate(cfg, noise, train_loss, n, reps);
  if (cell.missing)
    throw Error("cell " + noise.name() + "/" + train_loss.label() + "/n=" + std::to_string(n) +
                ": " + cell.error);
  return cell;
}

Report run_table(const ExperimentConfig& cfg, int threads, const CellCallback& on_cell) {
  cfg.validate();
  const NetworkShape shape = cfg.shape();
  std::vector<CellKey> keys;
  for (const auto& noise : cfg.noises)
    for (const auto& loss : cfg.train_losses)
      for (int n : cfg.ns) keys.push_back({&noise, &loss, n});

  const std::size_t R = static_cast<std::size_t>(cfg.replications);
  std::vector<ReplicationOutcome> reps(keys.size() * R);
  std::vector<std::atomic<std::size_t>> remaining(keys.size());
  for (auto& r : remaining) r.store(R);
  std::vector<CellResult> cells(keys.size());
  std::mutex callback_mu;

  parallel_for(reps.size(), threads, [&](std::size_t job) {
    const std::size_t c = job / R;
    const auto& key = keys[c];
    reps[job] = run_replication(cfg, shape, *key.noise, *key.loss, key.n,
                                static_cast<int>(job % R));
    if (remaining[c].fetch_sub(1) == 1) {
      std::vector<ReplicationOutcome> mine(reps.begin() + c * R, reps.begin() + (c + 1) * R);
      cells[c] = aggregate(cfg, *key.noise, *key.loss, key.n, mine);
      if (on_cell) {
        std::lock_guard lock(callback_mu);
        on_cell(cells[c]);
      }
    }
  });

  Report report;
  report.cells = std::move(cells);
  report.seed = cfg.seed;
  report.config_hash = text::fnv1a(canonical(cfg));
  report.code_version = std::string(code_version());
  return report;
}

std::string report_csv(const Report& report) {
  std::ostringstream os;
  os << "# sd is the sample standard deviation (divisor R-1) over non-diverged replications;"
        " mean/sd are excess risks unless the config disables excess; raw_* are testing risks\n";
  os << "target,noise,train_loss,test_loss,n,R,mean,sd,divergences,seed,raw_mean,raw_sd\n";
  for (const auto& cell : report.cells) {
    for (const auto& t : cell.tests) {
      os << cell.target << ',' << cell.noise.name() << ',' << cell.train_loss.label() << ','
         << t.loss.label() << ',' << cell.n << ',' << cell.replications << ','
         << text::format_double(t.mean) << ',' << text::format_double(t.sd) << ','
         << cell.divergences << ',' << report.seed << ',' << text::format_double(t.raw_mean)
         << ',' << text::format_double(t.raw_sd) << '\n';
    }
  }
  return os.str();
}

void emit_csv(const Report& report, const std::string& path) {
  text::write_file(path, report_csv(report));
}

std::vector<ReportRow> parse_report_csv(std::string_view csv) {
  std::vector<ReportRow> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(csv)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 12)
      throw InvalidArgument("report csv line " + std::to_string(line_no) + ": expected 12 fields");
    ReportRow r;
    r.target = f[0];
    r.noise = f[1];
    r.train_loss = f[2];
    r.test_loss = f[3];
    r.n = std::stoi(f[4]);
    r.replications = std::stoi(f[5]);
    r.mean = text::parse_double(f[6]);
    r.sd = text::parse_double(f[7]);
    r.divergences = std::stoi(f[8]);
    r.seed = std::stoull(f[9]);
    r.raw_mean = text::parse_double(f[10]);
    r.raw_sd = text::parse_double(f[11]);
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw InvalidArgument("report csv: missing header");
  return rows;
}

std::string cell_raw_csv(const CellResult& cell) {
  std::ostringstream os;
  os << "replication,status";
  for (const auto& t : cell.tests) os << ",excess_" << t.loss.label() << ",raw_" << t.loss.label();
  os << ",delta2\n";
  std::size_t k = 0;  // index among surviving replications
  for (const auto& st : cell.status) {
    os << st.index << ',' << (st.diverged ? "diverged" : "ok");
    if (st.diverged) {
      for (std::size_t j = 0; j < cell.tests.size(); ++j) os << ",,";
      os << ",\n";
      continue;
    }
    for (const auto& t : cell.tests)
      os << ',' << text::format_double(t.excess_values[k]) << ','
         << text::format_double(t.raw_values[k]);
    os << ',' << text::format_double(cell.delta2_values[k]) << '\n';
    ++k;
  }
  return os.str();
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw InvalidArgument("loglog_slope: need at least two paired points");
  const std::size_t m = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(xs[i] > 0.0)) throw InvalidArgument("loglog_slope: abscissae must be positive");
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(ys[i]) - my);
  }
  if (sxx == 0.0) throw InvalidArgument("loglog_slope: abscissae have zero variance");
  return sxy / sxx;
}

SweepResult convergence_sweep(const ExperimentConfig& cfg, const NoiseModel& noise,
                              const LossSpec& train_loss, const std::vector<int>& n_list,
                              int threads) {
  if (n_list.size() < 2) throw InvalidArgument("convergence_sweep: need at least two sample sizes");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] < n_list[i - 1])
      throw InvalidArgument("convergence_sweep: sample sizes must be ascending");
  {
    std::vector<double> xs(n_list.begin(), n_list.end());
    std::vector<double> probe(xs.size(), 1.0);
    loglog_slope(xs, probe);  // rejects repeated n before any training
  }
  SweepResult out;
  out.ns = n_list;
  for (int n : n_list) out.cells.push_back(run_cell(cfg, noise, train_loss, n, threads));
  std::vector<double> xs(n_list.begin(), n_list.end());
  for (std::size_t k = 0; k < cfg.test_losses.size(); ++k) {
    std::vector<double> ys;
    bool positive = true;
    for (const auto& c : out.cells) {
      ys.push_back(c.tests[k].mean);
      positive = positive && c.tests[k].mean > 0.0;
    }
    out.slopes.push_back(positive ? loglog_slope(xs, ys)
                                  : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace robreg
