// SPDX-License-Identifier: Apache-2.0
#include "robreg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "robreg/config.hpp"
#include "robreg/error.hpp"
#include "robreg/harness.hpp"
#include "robreg/plots.hpp"
#include "robreg/text.hpp"
#include "robreg/theory.hpp"

namespace robreg {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  /// Empty: "out" for experiment commands; the calculators then only print.
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool dry_run = false;
  std::vector<std::string> sets;
  int verbosity = 0;
};

struct TheoryArgs {
  int d = 1;
  double n = 1e6;
  std::string p = "2";
  double alpha = 1.0;
  double theta = 1.0;
  bool quadratic = false;
  int d_manifold = 0;
  double delta = 0.5;
  double c = 1.0;
  std::string loss = "huber";
  double B = 1.0;
  double C = 1.0;
  double C2 = 1.0;
  double lambda_quad = 1.0;
};

struct Selection {
  std::string noise;
  std::string loss;
  int replication = 0;
};

int threads_or_default(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

Json read_config_document(const std::string& path) {
  Json doc = Json::parse(text::read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ConfigError({path + ": not valid JSON"});
  // A provenance file carries the full config echo under "config".
  if (doc.is_object() && !doc.contains("schema_version") && doc.contains("config"))
    return doc.at("config");
  return doc;
}

ExperimentConfig resolve_config(const Common& c) {
  Json user = Json{{"schema_version", kConfigSchemaVersion}};
  if (!c.config.empty()) {
    try {
      user = read_config_document(c.config);
    } catch (const IoError& e) {
      throw ConfigError({e.what()});
    }
  }
  std::vector<std::string> overrides = c.sets;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  return config_from_json(merge_config(user, overrides));
}

std::string fmt(double v, int precision = 6) {
  if (!std::isfinite(v)) return text::format_double(v);
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << "  ";
      out << std::setw(static_cast<int>(width[j])) << (j == 0 ? std::left : std::right) << r[j];
    }
    out << std::right << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < r.size(); ++j) s += (j ? "," : "") + r[j];
    s += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return s;
}

std::string cell_stem(const CellResult& cell) {
  return cell.target + "_" + cell.noise.name() + "_" + std::string(to_string(cell.train_loss.kind())) +
         "_n" + std::to_string(cell.n);
}

std::string cell_summary(const CellResult& cell) {
  std::ostringstream os;
  os << cell.target << ' ' << cell.noise.name() << ' ' << cell.train_loss.label() << " n=" << cell.n
     << ':';
  if (cell.missing) {
    os << " MISSING (" << cell.error << ")";
    return os.str();
  }
  for (const auto& t : cell.tests)
    os << ' ' << to_string(t.loss.kind()) << '=' << fmt(t.mean, 4) << '(' << fmt(t.sd, 3) << ')';
  os << " divergences=" << cell.divergences;
  return os.str();
}

void print_plan(std::ostream& out, const ExperimentConfig& cfg, const std::string& what,
                std::size_t cells, const Common& c) {
  const NetworkShape shape = cfg.shape();
  out << "dry run: " << what << '\n'
      << "  target " << cfg.target.name() << " d=" << cfg.target.dim() << " inputs "
      << cfg.inputs.describe() << '\n'
      << "  network " << shape.to_string() << " S=" << shape.param_count() << '\n'
      << "  cells " << cells << " x R=" << cfg.replications << " (T=" << cfg.test_size
      << ", epochs=" << cfg.train.epochs << ", seed=" << cfg.seed << ")\n"
      << "  threads " << threads_or_default(c.threads) << ", output " << c.out << '\n'
      << "  config ok, nothing written\n";
}

Json provenance_json(const ExperimentConfig& cfg, const Report* report, const std::string& command,
                     int threads, double seconds) {
  Json p;
  p["command"] = command;
  p["code_version"] = std::string(code_version());
  p["seed"] = cfg.seed;
  if (report) {
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << report->config_hash;
    p["config_hash"] = hash.str();
    p["divergences"] = report->total_divergences();
    p["complete"] = report->complete();
  }
  p["threads"] = threads;
  p["wall_seconds"] = seconds;
  p["config"] = config_to_json(cfg);
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const NoiseModel& select_noise(const ExperimentConfig& cfg, const std::string& name) {
  if (name.empty()) return cfg.noises.front();
  for (const auto& n : cfg.noises)
    if (n.name() == name) return n;
  throw ConfigError({"noise '" + name + "' is not in the config's noise list"});
}

const LossSpec& select_loss(const ExperimentConfig& cfg, const std::string& name) {
  if (name.empty()) return cfg.train_losses.front();
  for (const auto& l : cfg.train_losses)
    if (to_string(l.kind()) == name || l.label() == name) return l;
  throw ConfigError({"loss '" + name + "' is not in the config's train_losses"});
}

int cmd_gen(const Common& c, const Selection&, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(c);
  if (c.dry_run) {
    print_plan(out, cfg, "gen", cfg.noises.size() * cfg.ns.size(), c);
    return exit_code::kOk;
  }
  for (const auto& noise : cfg.noises) {
    for (int n : cfg.ns) {
      auto streams = replication_streams(cfg, noise, n, 0);
      const Dataset data = make_dataset(cfg.target, noise, n, streams.data, cfg.inputs);
      const std::string path = (fs::path(c.out) / "data" /
                                (cfg.target.name() + "_" + noise.name() + "_n" +
                                 std::to_string(n) + ".csv"))
                                   .string();
      save_dataset(data, path);
      out << "wrote " << path << " (" << n << " rows)\n";
    }
  }
  return exit_code::kOk;
}

int cmd_train(const Common& c, const Selection& sel, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(c);
  const NoiseModel& noise = select_noise(cfg, sel.noise);
  const LossSpec& loss = select_loss(cfg, sel.loss);
  const int n = cfg.ns.front();
  if (c.dry_run) {
    print_plan(out, cfg, "train " + loss.label() + " on " + noise.name(), 1, c);
    return exit_code::kOk;
  }
  auto streams = replication_streams(cfg, noise, n, sel.replication);
  const Dataset data = make_dataset(cfg.target, noise, n, streams.data, cfg.inputs);
  const Dataset test = make_dataset(cfg.target, noise, cfg.test_size, streams.test, cfg.inputs);
  const TrainResult fit = train(data, cfg.shape(), loss, cfg.train, streams.init);
  const std::string stem = cfg.target.name() + "_" + noise.name() + "_" +
                           std::string(to_string(loss.kind())) + "_n" + std::to_string(n);
  const fs::path dir(c.out);
  save_model(fit.params, (dir / "models" / (stem + ".txt")).string());
  text::write_file((dir / "raw" / ("trace_" + stem + ".csv")).string(), fit.trace.to_csv());
  out << stem << ": final training loss " << fmt(fit.trace.epoch_loss.back()) << '\n';
  for (const auto& t : cfg.test_losses) {
    const double ex = excess_risk(fit.params, cfg.target, test.xs,
                                  {test.ys.data(), static_cast<std::size_t>(test.ys.size())}, t);
    out << "  excess " << t.label() << " = " << fmt(ex) << '\n';
  }
  return exit_code::kOk;
}

int cmd_table(const Common& c, std::ostream& out, const std::string& command) {
  const ExperimentConfig cfg = resolve_config(c);
  const std::size_t cells = cfg.noises.size() * cfg.train_losses.size() * cfg.ns.size();
  if (c.dry_run) {
    print_plan(out, cfg, "table", cells, c);
    return exit_code::kOk;
  }
  const int threads = threads_or_default(c.threads);
  const auto t0 = std::chrono::steady_clock::now();
  // Summaries print in grid order once all cells finish; completion order varies with threads.
  const Report report = run_table(cfg, threads);
  const fs::path dir(c.out);
  emit_csv(report, (dir / "report.csv").string());
  for (const auto& cell : report.cells) {
    text::write_file((dir / "raw" / (cell_stem(cell) + ".csv")).string(), cell_raw_csv(cell));
    out << cell_summary(cell) << '\n';
  }
  text::write_file((dir / "provenance.json").string(),
                   provenance_json(cfg, &report, command, threads, seconds_since(t0)).dump(2) +
                       "\n");
  out << "wrote " << (dir / "report.csv").string() << '\n';
  if (!report.complete() || report.total_divergences() > 0) return exit_code::kPartial;
  return exit_code::kOk;
}

int cmd_sweep(const Common& c, const Selection& sel, std::ostream& out, const std::string& command) {
  const ExperimentConfig cfg = resolve_config(c);
  const NoiseModel& noise = select_noise(cfg, sel.noise);
  const LossSpec& loss = select_loss(cfg, sel.loss);
  if (c.dry_run) {
    print_plan(out, cfg, "sweep " + loss.label() + " on " + noise.name(), cfg.ns.size(), c);
    return exit_code::kOk;
  }
  const int threads = threads_or_default(c.threads);
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult sweep = convergence_sweep(cfg, noise, loss, cfg.ns, threads);
  std::string csv = "n,test_loss,mean,sd,divergences\n";
  int divergences = 0;
  for (const auto& cell : sweep.cells) {
    out << cell_summary(cell) << '\n';
    divergences += cell.divergences;
    for (const auto& t : cell.tests)
      csv += std::to_string(cell.n) + "," + t.loss.label() + "," + text::format_double(t.mean) +
             "," + text::format_double(t.sd) + "," + std::to_string(cell.divergences) + "\n";
  }
  for (std::size_t k = 0; k < cfg.test_losses.size(); ++k) {
    csv += "# slope " + cfg.test_losses[k].label() + " " + text::format_double(sweep.slopes[k]) +
           "\n";
    out << "log-log slope (" << cfg.test_losses[k].label() << "): " << fmt(sweep.slopes[k], 4)
        << '\n';
  }
  const fs::path dir(c.out);
  text::write_file((dir / "sweep.csv").string(), csv);
  text::write_file((dir / "provenance.json").string(),
                   provenance_json(cfg, nullptr, command, threads, seconds_since(t0)).dump(2) +
                       "\n");
  return divergences > 0 ? exit_code::kPartial : exit_code::kOk;
}

struct FitBundle {
  Dataset data;
  std::vector<FitCurve> fits;
  std::vector<TraceCurve> traces;
  std::string stem;
};

FitBundle fit_every_loss(const ExperimentConfig& cfg, const NoiseModel& noise, int threads) {
  const int n = cfg.ns.front();
  auto streams = replication_streams(cfg, noise, n, 0);
  FitBundle b{make_dataset(cfg.target, noise, n, streams.data, cfg.inputs), {}, {}, {}};
  b.stem = cfg.target.name() + "_" + noise.name() + "_n" + std::to_string(n);
  std::vector<std::optional<TrainResult>> results(cfg.train_losses.size());
  parallel_for(results.size(), threads, [&](std::size_t k) {
    PrngStream init = streams.init;
    results[k] = train(b.data, cfg.shape(), cfg.train_losses[k], cfg.train, init);
  });
  for (std::size_t k = 0; k < results.size(); ++k) {
    b.fits.push_back({cfg.train_losses[k].label(), results[k]->params});
    b.traces.push_back({cfg.train_losses[k].label(), results[k]->trace});
  }
  return b;
}

int cmd_plot(const Common& c, const Selection& sel, std::ostream& out, bool fit) {
  const ExperimentConfig cfg = resolve_config(c);
  const NoiseModel& noise = select_noise(cfg, sel.noise);
  if (fit && cfg.target.dim() != 1) throw InvalidArgument("fitplot: univariate only");
  if (c.dry_run) {
    print_plan(out, cfg, fit ? "fitplot" : "traceplot", cfg.train_losses.size(), c);
    return exit_code::kOk;
  }
  const FitBundle b = fit_every_loss(cfg, noise, threads_or_default(c.threads));
  const fs::path dir = fs::path(c.out) / "plots";
  const std::string path =
      (dir / ((fit ? "fit_" : "trace_") + b.stem + ".svg")).string();
  if (fit) {
    emit_fit_svg(b.fits, cfg.target, b.data, path);
  } else {
    emit_trace_svg(b.traces, path);
  }
  out << "wrote " << path << '\n';
  return exit_code::kOk;
}

theory::RateSpec rate_from(const TheoryArgs& a) {
  theory::RateSpec r;
  r.p = parse_p(Json(a.p));
  r.alpha = a.alpha;
  r.d = a.d;
  r.theta = a.theta;
  if (a.d_manifold > 0) r.d_target = theory::d_delta(a.d_manifold, a.d, a.delta, a.c);
  r.validate();
  return r;
}

std::vector<std::string> design_row(const theory::NetworkDesign& design, const theory::RateSpec& rate,
                                    const TheoryArgs& a, const std::string& name) {
  const LossSpec loss = LossSpec::with_default_hyper(parse_loss_kind(a.loss));
  theory::BoundConstants k{a.C, a.C2, a.lambda_quad, 1.0};
  theory::ExcessVariant variant = a.quadratic ? theory::ExcessVariant::Quadratic
                                              : theory::ExcessVariant::Lipschitz;
  if (rate.d_target > 0)
    variant = a.quadratic ? theory::ExcessVariant::ManifoldQuadratic
                          : theory::ExcessVariant::Manifold;
  theory::NetworkDesign dsg = design;
  dsg.B = a.B;
  const theory::BoundTerms t = theory::excess_bound(dsg, rate, loss, a.n, k, variant);
  return {name,
          std::to_string(design.W),
          std::to_string(design.D),
          std::to_string(design.S),
          std::to_string(design.U),
          fmt(theory::rate_exponent(rate)),
          "stochastic=" + fmt(t.stochastic) + ";approximation=" + fmt(t.approximation) +
              ";total=" + fmt(t.total)};
}

int cmd_design(const Common& c, const TheoryArgs& a, std::ostream& out, bool bounds_only) {
  const theory::RateSpec rate = rate_from(a);
  std::optional<int> dd;
  if (rate.d_target > 0) dd = rate.d_target;
  std::vector<std::vector<std::string>> rows;
  if (a.quadratic) {
    const auto rect = theory::rectangle_design(a.n, rate, true, dd);
    rows.push_back(design_row(rect, rate, a, std::string(theory::to_string(rect.label))));
  }
  if (!a.quadratic || bounds_only) {
    for (auto label : {theory::DesignLabel::DFW, theory::DesignLabel::WFD, theory::DesignLabel::DAW})
      rows.push_back(
          design_row(theory::catalog_design(label, a.n, rate), rate, a,
                     std::string(theory::to_string(label))));
  }
  const std::vector<std::string> header{"name", "W", "D", "S", "U", "exponent", "bound_terms"};
  out << (bounds_only ? "excess risk bounds" : "network designs") << " at n=" << fmt(a.n)
      << " (d=" << a.d << ", p=" << a.p << ", alpha=" << fmt(a.alpha)
      << (rate.d_target > 0 ? ", d_delta=" + std::to_string(rate.d_target) : std::string())
      << "; bounds up to constants)\n";
  print_table(out, header, rows);
  if (!c.dry_run && !c.out.empty()) {
    const std::string path =
        (fs::path(c.out) / (bounds_only ? "bounds.csv" : "design.csv")).string();
    text::write_file(path, to_csv(header, rows));
  }
  return exit_code::kOk;
}

int cmd_ren(const Common& c, const TheoryArgs& a, std::ostream& out) {
  const theory::RateSpec rate = rate_from(a);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : theory::ren_catalog(a.n, rate))
    rows.push_back({std::string(theory::to_string(r.first)) + " vs " +
                        std::string(theory::to_string(r.second)),
                    fmt(r.leading, 4),
                    std::isfinite(r.with_log_factors) ? fmt(r.with_log_factors, 4)
                                                      : std::string("n/a (size <= 1)")});
  const std::vector<std::string> header{"pair", "ren", "ren_with_log_factors"};
  out << "relative efficiency at n=" << fmt(a.n) << " (p=" << a.p << ", alpha=" << fmt(a.alpha)
      << ", d=" << a.d << ")\n";
  print_table(out, header, rows);
  if (!c.dry_run && !c.out.empty())
    text::write_file((fs::path(c.out) / "ren.csv").string(), to_csv(header, rows));
  return exit_code::kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"robreg: deep robust nonparametric regression toolkit", "robreg"};
  app.fallthrough();
  app.require_subcommand(1, 1);
  Common c;
  Selection sel;
  TheoryArgs th;
  app.add_option("--config", c.config, "Experiment config (JSON)");
  app.add_option("--out", c.out, "Output directory (default: out)");
  app.add_option("--seed", c.seed, "Master seed (overrides the config)");
  app.add_option("--threads", c.threads, "Worker threads (default: all cores)");
  app.add_flag("--dry-run", c.dry_run, "Validate and print the plan without writing files");
  app.add_option("--set", c.sets, "Config override key=value (repeatable)")->allow_extra_args(false);
  app.add_flag("-v,--verbose", c.verbosity, "More output");

  auto* gen = app.add_subcommand("gen", "Generate training data sets");
  auto* trn = app.add_subcommand("train", "Train one network and report its test excess risks");
  auto* table = app.add_subcommand("table", "Run the noise x loss grid and write a report");
  auto* sweep = app.add_subcommand("sweep", "Excess risk against n with a log-log slope");
  auto* design = app.add_subcommand("design", "Network designs for a sample size");
  auto* bounds = app.add_subcommand("bounds", "Excess risk bounds (up to constants)");
  auto* ren = app.add_subcommand("ren", "Relative efficiency of network designs");
  auto* fitplot = app.add_subcommand("fitplot", "SVG of fitted curves (univariate)");
  auto* traceplot = app.add_subcommand("traceplot", "SVG of training loss traces");

  for (auto* sub : {trn, sweep, fitplot, traceplot})
    sub->add_option("--noise", sel.noise, "Noise model name from the config");
  for (auto* sub : {trn, sweep}) sub->add_option("--loss", sel.loss, "Training loss from the config");
  trn->add_option("--replication", sel.replication, "Replication index")->check(CLI::NonNegativeNumber);

  for (auto* sub : {design, bounds, ren}) {
    sub->add_option("--d", th.d, "Input dimension")->check(CLI::PositiveNumber);
    sub->add_option("--n", th.n, "Sample size");
    sub->add_option("--p", th.p, "Moment order p (number or inf)");
    sub->add_option("--alpha", th.alpha, "Hoelder exponent");
    sub->add_option("--theta", th.theta, "Hoelder constant");
  }
  for (auto* sub : {design, bounds}) {
    sub->add_flag("--quadratic", th.quadratic, "Local quadratic loss bound");
    sub->add_option("--d-manifold", th.d_manifold, "Manifold dimension (enables d_delta)");
    sub->add_option("--delta", th.delta, "Manifold distortion delta");
    sub->add_option("--c", th.c, "d_delta constant");
    sub->add_option("--loss", th.loss, "Loss for the Lipschitz constant");
    sub->add_option("--B", th.B, "Output bound B");
    sub->add_option("--C", th.C, "Stochastic term constant");
    sub->add_option("--C2", th.C2, "Manifold approximation constant");
    sub->add_option("--lambda-quad", th.lambda_quad, "Local quadratic constant");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_code::kUsage;
  }

  const bool calculator = design->parsed() || bounds->parsed() || ren->parsed();
  if (c.out.empty() && !calculator) c.out = "out";
  std::string command = "robreg";
  for (const auto& a : args) command += " " + a;
  try {
    if (gen->parsed()) return cmd_gen(c, sel, out);
    if (trn->parsed()) return cmd_train(c, sel, out);
    if (table->parsed()) return cmd_table(c, out, command);
    if (sweep->parsed()) return cmd_sweep(c, sel, out, command);
    if (design->parsed()) return cmd_design(c, th, out, false);
    if (bounds->parsed()) return cmd_design(c, th, out, true);
    if (ren->parsed()) return cmd_ren(c, th, out);
    if (fitplot->parsed()) return cmd_plot(c, sel, out, true);
    if (traceplot->parsed()) return cmd_plot(c, sel, out, false);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kRuntime;
  }
  err << app.help();
  return exit_code::kUsage;
}

}  // namespace robreg
