// SPDX-License-Identifier: Apache-2.0
#include "robreg/datagen.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "robreg/error.hpp"
#include "robreg/text.hpp"

namespace robreg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDatasetFormatVersion = 1;

constexpr std::array<double, 10> kJumpLocations = {0.1,  0.15, 0.23, 0.28, 0.40,
                                                   0.44, 0.65, 0.76, 0.78, 0.81};
constexpr std::array<double, 10> kBlocksHeights = {4, -5, -2.5, 4, -3, 2.1, 4.3, -1.1, -2.1, -4.2};
constexpr std::array<double, 10> kBumpsHeights = {4, 5, 2.5, 4, 3, 2.1, 4.3, 1.1, 2.1, 4.2};
constexpr std::array<double, 10> kBumpsWidths = {0.005, 0.005, 0.006, 0.01, 0.01,
                                                 0.03,  0.01,  0.01,  0.005, 0.008};

double sgn(double x) { return (x > 0) - (x < 0); }

}  // namespace

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::Blocks: return "blocks";
    case TargetKind::Bumps: return "bumps";
    case TargetKind::Heavisine: return "heavisine";
    case TargetKind::Doppler: return "doppler";
    case TargetKind::KA: return "ka";
    case TargetKind::Custom: return "custom";
  }
  return "?";
}

TargetKind parse_target_kind(std::string_view name) {
  for (auto k : {TargetKind::Blocks, TargetKind::Bumps, TargetKind::Heavisine,
                 TargetKind::Doppler, TargetKind::KA}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown target kind '" + std::string(name) + "'");
}

double dj_target(TargetKind kind, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("univariate targets are defined on [0, 1]");
  switch (kind) {
    case TargetKind::Blocks: {
      double f = 0.0;
      for (std::size_t i = 0; i < kJumpLocations.size(); ++i)
        if (x > kJumpLocations[i]) f += kBlocksHeights[i];
      return f;
    }
    case TargetKind::Bumps: {
      double f = 0.0;
      for (std::size_t i = 0; i < kJumpLocations.size(); ++i)
        f += kBumpsHeights[i] * std::pow(1.0 + std::abs(x - kJumpLocations[i]) / kBumpsWidths[i], -4.0);
      return f;
    }
    case TargetKind::Heavisine:
      return 4.0 * std::sin(4.0 * kPi * x) - sgn(x - 0.3) - sgn(0.72 - x);
    case TargetKind::Doppler:
      return std::sqrt(x * (1.0 - x)) * std::sin(2.2 * kPi / (x + 0.15));
    default:
      throw InvalidArgument("dj_target needs one of blocks, bumps, heavisine, doppler");
  }
}

double ka_pool(int index, double x) {
  switch (index) {
    case 1: return -2.2 * x + 0.3;
    case 2: return 0.7 * x * x * x - 0.2 * x * x + 0.3 * x - 0.3;
    case 3: return 0.3 * sgn(x) * std::sqrt(std::abs(x));
    case 4: return 0.8 * std::log(std::abs(x) + 0.01);
    case 5: return std::exp(std::min(0.2 * x - 0.1, 4.0));
    case 6: return std::sin(6.28 * x);
    case 7: return 2.0 / (std::abs(x) + 0.1);
    default: throw InvalidArgument("KA pool index must be in 1..7");
  }
}

std::vector<int> ka_indices(int d, std::uint64_t seed) {
  if (d < 1) throw InvalidArgument("KA target dimension must be >= 1");
  PrngStream rng(seed);
  std::vector<int> idx(static_cast<std::size_t>((2 * d + 1) * (d + 1)));
  for (auto& i : idx) i = static_cast<int>(rng.below(7)) + 1;
  return idx;
}

TargetFn TargetFn::dj(TargetKind kind) {
  if (kind == TargetKind::KA || kind == TargetKind::Custom)
    throw InvalidArgument("TargetFn::dj needs a univariate kind");
  TargetFn t;
  t.kind_ = kind;
  t.dim_ = 1;
  t.name_ = std::string(to_string(kind));
  t.continuous_ = !(kind == TargetKind::Blocks || kind == TargetKind::Heavisine);
  return t;
}

TargetFn TargetFn::ka(int d, std::vector<int> indices, std::uint64_t seed) {
  if (d < 1) throw InvalidArgument("KA target dimension must be >= 1");
  if (indices.size() != static_cast<std::size_t>((2 * d + 1) * (d + 1)))
    throw InvalidArgument("KA target needs (2d+1)(d+1) indices");
  for (int i : indices)
    if (i < 1 || i > 7) throw InvalidArgument("KA pool index must be in 1..7");
  TargetFn t;
  t.kind_ = TargetKind::KA;
  t.dim_ = d;
  t.name_ = "ka";
  t.indices_ = std::move(indices);
  t.seed_ = seed;
  // h_3 and h_7 are continuous; none of the pool functions jump.
  t.continuous_ = true;
  return t;
}

TargetFn TargetFn::custom(int d, Evaluator fn, std::string name, bool uniformly_continuous) {
  if (d < 1) throw InvalidArgument("target dimension must be >= 1");
  if (!fn) throw InvalidArgument("custom target needs an evaluator");
  TargetFn t;
  t.kind_ = TargetKind::Custom;
  t.dim_ = d;
  t.name_ = std::move(name);
  t.continuous_ = uniformly_continuous;
  t.custom_ = std::move(fn);
  return t;
}

double TargetFn::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw InvalidArgument("target expects dimension " + std::to_string(dim_));
  switch (kind_) {
    case TargetKind::KA: return ka_eval(*this, x);
    case TargetKind::Custom: return custom_(x);
    default: return dj_target(kind_, x[0]);
  }
}

Eigen::VectorXd TargetFn::eval_rows(const Eigen::MatrixXd& xs) const {
  if (xs.cols() != dim_) throw InvalidArgument("target expects dimension " + std::to_string(dim_));
  Eigen::VectorXd out(xs.rows());
  std::vector<double> row(static_cast<std::size_t>(dim_));
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    for (int j = 0; j < dim_; ++j) row[static_cast<std::size_t>(j)] = xs(i, j);
    out(i) = (*this)(row);
  }
  return out;
}

TargetFn ka_target(int d, std::uint64_t seed) { return TargetFn::ka(d, ka_indices(d, seed), seed); }

double ka_eval(const TargetFn& target, std::span<const double> x) {
  if (target.kind() != TargetKind::KA) throw InvalidArgument("ka_eval needs a KA target");
  const int d = target.dim();
  if (static_cast<int>(x.size()) != d) throw InvalidArgument("KA target dimension mismatch");
  const auto& idx = target.indices();
  double f = 0.0;
  for (int k = 0; k <= 2 * d; ++k) {
    const auto base = static_cast<std::size_t>(k * (d + 1));
    double inner = 0.0;
    for (int m = 0; m < d; ++m) inner += ka_pool(idx[base + 1 + static_cast<std::size_t>(m)], x[static_cast<std::size_t>(m)]);
    f += ka_pool(idx[base], inner);
  }
  return f;
}

void NoiseModel::validate() const {
  if (kind == NoiseKind::Mixture) {
    if (!(xi > 0.0 && xi < 1.0)) throw InvalidArgument("mixture weight xi must lie in (0, 1)");
    if (!(sd2 > 0.0)) throw InvalidArgument("mixture wide-component sd must be positive");
  }
}

std::string NoiseModel::name() const {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Normal01: return "normal";
    case NoiseKind::StudentT2: return "t2";
    case NoiseKind::Cauchy01: return "cauchy";
    case NoiseKind::Mixture: return "mixture";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view name) {
  for (auto k : {NoiseKind::None, NoiseKind::Normal01, NoiseKind::StudentT2, NoiseKind::Cauchy01,
                 NoiseKind::Mixture}) {
    if (NoiseModel{k}.name() == name) return k;
  }
  throw InvalidArgument("unknown noise kind '" + std::string(name) + "'");
}

double sample_noise(const NoiseModel& model, PrngStream& rng) {
  switch (model.kind) {
    case NoiseKind::None:
      return 0.0;
    case NoiseKind::Normal01:
      return rng.normal();
    case NoiseKind::StudentT2: {
      // t(2) = Z / sqrt(chi2_2 / 2) and chi2_2 / 2 is Exp(1).
      const double z = rng.normal();
      const double e = -std::log(rng.uniform());
      return z / std::sqrt(e);
    }
    case NoiseKind::Cauchy01:
      return std::tan(kPi * (rng.uniform() - 0.5));
    case NoiseKind::Mixture: {
      const bool narrow = rng.uniform() < model.xi;
      const double z = rng.normal();
      return narrow ? z : model.sd2 * z;
    }
  }
  return 0.0;
}

Eigen::VectorXd manifold_embed(std::span<const double> z, int d) {
  const int dm = static_cast<int>(z.size());
  if (dm < 1 || dm >= d) throw InvalidArgument("manifold embedding needs 1 <= d_M < d");
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i) {
    const double zj = z[static_cast<std::size_t>(i % dm)];
    const double phase = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(d);
    out(i) = 0.1 + 0.8 * (0.8 * zj + 0.1 * (1.0 + std::sin(2.0 * kPi * zj + phase)));
  }
  return out;
}

Eigen::MatrixXd manifold_inputs(int d_manifold, int d, double rho, int n, PrngStream& rng) {
  if (d_manifold < 1 || d_manifold >= d) throw InvalidArgument("manifold inputs need 1 <= d_M < d");
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("manifold neighbourhood rho must lie in [0, 1)");
  if (n < 1) throw InvalidArgument("n must be >= 1");
  Eigen::MatrixXd xs(n, d);
  std::vector<double> z(static_cast<std::size_t>(d_manifold));
  for (int i = 0; i < n; ++i) {
    for (auto& zj : z) zj = rng.uniform();
    const Eigen::VectorXd p = manifold_embed(z, d);
    for (int j = 0; j < d; ++j) {
      const double u = rho > 0.0 ? rng.uniform(-rho, rho) : 0.0;
      xs(i, j) = std::clamp(p(j) + u, 0.0, 1.0);
    }
  }
  return xs;
}

std::string InputDesign::describe() const {
  if (kind == Kind::Uniform) return "uniform";
  return "manifold(d_M=" + std::to_string(d_manifold) + ",rho=" + text::format_double(rho) + ")";
}

Dataset make_dataset(const TargetFn& target, const NoiseModel& noise, int n, PrngStream& rng,
                     const InputDesign& inputs) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  noise.validate();
  Dataset data;
  data.provenance = {target.name(), noise.name(), inputs.describe(), rng.seed(), rng.stream_id(),
                     n, target.dim()};
  const int d = target.dim();
  if (inputs.kind == InputDesign::Kind::Manifold) {
    data.xs = manifold_inputs(inputs.d_manifold, d, inputs.rho, n, rng);
  } else {
    data.xs.resize(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) data.xs(i, j) = rng.uniform();
  }
  data.ys = target.eval_rows(data.xs);
  for (int i = 0; i < n; ++i) data.ys(i) += sample_noise(noise, rng);
  return data;
}

std::string provenance_sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json").string();
}

void save_dataset(const Dataset& data, const std::string& csv_path) {
  std::string csv;
  for (int j = 0; j < data.dim(); ++j) csv += "x" + std::to_string(j + 1) + ",";
  csv += "y\n";
  for (int i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.dim(); ++j) csv += text::format_double(data.xs(i, j)) + ",";
    csv += text::format_double(data.ys(i)) + "\n";
  }
  text::write_file(csv_path, csv);

  const auto& p = data.provenance;
  nlohmann::ordered_json side = {{"format_version", kDatasetFormatVersion},
                                 {"target", p.target},
                                 {"noise", p.noise},
                                 {"inputs", p.inputs},
                                 {"n", p.n},
                                 {"d", p.d},
                                 {"seed", p.seed},
                                 {"stream", p.stream}};
  text::write_file(provenance_sidecar_path(csv_path), side.dump(2) + "\n");
}

Dataset load_dataset(const std::string& csv_path) {
  std::istringstream in(text::read_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file '" + csv_path + "'");
  const auto header = text::split(line, ',');
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1 || header.back() != "y") throw IoError("dataset '" + csv_path + "': bad header");
  for (int j = 0; j < d; ++j)
    if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j + 1))
      throw IoError("dataset '" + csv_path + "': bad header");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = text::split(line, ',');
    if (static_cast<int>(cells.size()) != d + 1)
      throw IoError("dataset '" + csv_path + "': row " + std::to_string(rows.size() + 1) +
                    " has the wrong number of columns");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(text::parse_double(c));
    rows.push_back(std::move(row));
  }
  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.xs.resize(n, d);
  data.ys.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) data.xs(i, j) = r[static_cast<std::size_t>(j)];
    data.ys(i) = r.back();
  }
  data.provenance.n = static_cast<int>(n);
  data.provenance.d = d;

  const auto side_path = provenance_sidecar_path(csv_path);
  if (std::filesystem::exists(side_path)) {
    const auto side = nlohmann::json::parse(text::read_file(side_path));
    if (side.value("format_version", 0) != kDatasetFormatVersion)
      throw IoError("dataset sidecar '" + side_path + "': unsupported format version");
    auto& p = data.provenance;
    p.target = side.value("target", "");
    p.noise = side.value("noise", "");
    p.inputs = side.value("inputs", "uniform");
    p.seed = side.value("seed", std::uint64_t{0});
    p.stream = side.value("stream", std::uint64_t{0});
    if (side.value("n", -1) != p.n || side.value("d", -1) != p.d)
      throw IoError("dataset sidecar '" + side_path + "' disagrees with the CSV shape");
  }
  return data;
}

}  // namespace robreg
