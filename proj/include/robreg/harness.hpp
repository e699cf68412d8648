// SPDX-License-Identifier: Apache-2.0
//
// Replicated train/test experiments over (noise model x training loss) grids.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robreg/datagen.hpp"
#include "robreg/losses.hpp"
#include "robreg/mlp.hpp"
#include "robreg/optim.hpp"
#include "robreg/prng.hpp"

namespace robreg {

struct ExperimentConfig {
  TargetFn target = TargetFn::dj(TargetKind::Blocks);
  InputDesign inputs;
  std::vector<NoiseModel> noises;
  std::vector<LossSpec> train_losses;
  std::vector<LossSpec> test_losses;
  std::vector<int> ns{512};
  int test_size = 100000;
  int replications = 10;
  /// Hidden widths; the input width is the target dimension.
  std::vector<int> hidden{256, 256, 256, 256, 256};
  TrainConfig train;
  std::uint64_t seed = 2021;
  /// Clip predictions to [-clamp_bound, clamp_bound] before evaluation.
  bool clamp_eval = false;
  double clamp_bound = 1e6;
  /// Report excess risks (true) or raw testing risks (false) in the mean/sd columns.
  bool excess = true;

  NetworkShape shape() const;
  /// Throws ConfigError listing every violated invariant.
  void validate() const;
};

/// Mean of L(prediction_t, y_t).
double testing_risk(std::span<const double> predictions, std::span<const double> ys,
                    const LossSpec& loss);
/// Model predictions for the rows of `xs` (T x d), optionally clipped to [-clamp, clamp].
Eigen::VectorXd predict(const MlpParams& model, const Eigen::MatrixXd& xs,
                        std::optional<double> clamp = std::nullopt);
double testing_risk(const MlpParams& model, const Eigen::MatrixXd& xs, std::span<const double> ys,
                    const LossSpec& loss);

/// testing_risk(predictions) - testing_risk(f0 values) on the same test draw.
double excess_risk(std::span<const double> predictions, std::span<const double> f0_values,
                   std::span<const double> ys, const LossSpec& loss);
double excess_risk(const MlpParams& model, const TargetFn& target, const Eigen::MatrixXd& xs,
                   std::span<const double> ys, const LossSpec& loss);

/// Mean of min(|f - f0|, (f - f0)^2).
double delta2_metric(std::span<const double> predictions, std::span<const double> f0_values);
double delta2_metric(const MlpParams& model, const TargetFn& target, const Eigen::MatrixXd& xs);

struct TestLossStats {
  LossSpec loss;
  /// Statistics of the excess risks (or raw risks when config.excess is off).
  double mean = 0.0;
  double sd = 0.0;
  double raw_mean = 0.0;
  double raw_sd = 0.0;
  /// Per surviving replication, in replication order.
  std::vector<double> excess_values;
  std::vector<double> raw_values;
};

struct ReplicationStatus {
  int index = 0;
  bool diverged = false;
  std::string message;
};

struct CellResult {
  std::string target;
  NoiseModel noise;
  LossSpec train_loss = LossSpec::ls();
  int n = 0;
  int replications = 0;
  int divergences = 0;
  bool missing = false;
  std::string error;
  std::vector<TestLossStats> tests;
  std::vector<double> delta2_values;
  std::vector<ReplicationStatus> status;

  const TestLossStats& test(LossKind kind) const;
};

struct Report {
  std::vector<CellResult> cells;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string code_version;

  int total_divergences() const;
  bool complete() const;
};

/// The stream keys a replication uses; exposed so tests can regenerate its data.
struct ReplicationStreams {
  PrngStream data;
  PrngStream test;
  PrngStream init;
};
ReplicationStreams replication_streams(const ExperimentConfig& cfg, const NoiseModel& noise, int n,
                                       int replication);

/// Runs every replication of one grid cell. Replications are independent jobs
/// on up to `threads` workers; results are keyed by replication index.
/// Throws Error if every replication diverges.
CellResult run_cell(const ExperimentConfig& cfg, const NoiseModel& noise, const LossSpec& train_loss,
                    int n, int threads = 1);

using CellCallback = std::function<void(const CellResult&)>;

/// Full grid noise x train loss x n. A cell whose replications all diverge is
/// marked missing instead of aborting the table.
Report run_table(const ExperimentConfig& cfg, int threads = 1, const CellCallback& on_cell = {});

/// Report as CSV: target,noise,train_loss,test_loss,n,R,mean,sd,divergences,seed,raw_mean,raw_sd.
std::string report_csv(const Report& report);
void emit_csv(const Report& report, const std::string& path);

struct ReportRow {
  std::string target;
  std::string noise;
  std::string train_loss;
  std::string test_loss;
  int n = 0;
  int replications = 0;
  double mean = 0.0;
  double sd = 0.0;
  int divergences = 0;
  std::uint64_t seed = 0;
  double raw_mean = 0.0;
  double raw_sd = 0.0;
};
std::vector<ReportRow> parse_report_csv(std::string_view csv);

/// Per-replication values of one cell.
std::string cell_raw_csv(const CellResult& cell);

struct SweepResult {
  std::vector<int> ns;
  std::vector<CellResult> cells;
  /// Log-log slope of mean excess risk against n, one per test loss (NaN when a
  /// mean is not positive).
  std::vector<double> slopes;
};

/// Least-squares slope of log(y) on log(x). Throws if the abscissae do not vary.
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

/// run_cell for each n (ascending, at least two entries).
SweepResult convergence_sweep(const ExperimentConfig& cfg, const NoiseModel& noise,
                              const LossSpec& train_loss, const std::vector<int>& n_list,
                              int threads = 1);

/// Runs fn(0..count-1) on up to `threads` workers; rethrows the first exception.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Mean and sample standard deviation (divisor count - 1; 0 for a single value).
std::pair<double, double> mean_sd(std::span<const double> values);

/// Version string embedded in report provenance.
std::string_view code_version();

}  // namespace robreg
