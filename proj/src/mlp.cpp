// SPDX-License-Identifier: Apache-2.0
#include "robreg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robreg/error.hpp"
#include "robreg/text.hpp"

namespace robreg {

namespace {

constexpr std::string_view kModelTag = "robreg-mlp";
constexpr int kModelVersion = 1;

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

void check_batch(const MlpParams& params, const Eigen::MatrixXd& xs, std::size_t n_targets) {
  if (xs.cols() == 0) throw InvalidArgument("empty batch");
  if (xs.rows() != params.shape().input_dim())
    throw InvalidArgument("input dimension " + std::to_string(xs.rows()) +
                          " does not match network input " +
                          std::to_string(params.shape().input_dim()));
  if (static_cast<std::size_t>(xs.cols()) != n_targets)
    throw InvalidArgument("batch has " + std::to_string(xs.cols()) + " inputs but " +
                          std::to_string(n_targets) + " targets");
}

}  // namespace

NetworkShape::NetworkShape(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw InvalidArgument("a network needs at least input and output widths");
  for (int w : widths_)
    if (w < 1) throw InvalidArgument("layer widths must be positive");
  if (widths_.back() != 1) throw InvalidArgument("output width must be 1");
}

NetworkShape NetworkShape::rectangle(int d, int width, int depth) {
  if (depth < 0) throw InvalidArgument("depth must be non-negative");
  std::vector<int> w;
  w.push_back(d);
  for (int i = 0; i < depth; ++i) w.push_back(width);
  w.push_back(1);
  return NetworkShape(std::move(w));
}

int NetworkShape::width() const noexcept {
  if (widths_.size() <= 2) return 0;
  return *std::max_element(widths_.begin() + 1, widths_.end() - 1);
}

std::int64_t NetworkShape::neuron_count() const noexcept {
  std::int64_t u = 0;
  for (std::size_t i = 1; i + 1 < widths_.size(); ++i) u += widths_[i];
  return u;
}

std::int64_t NetworkShape::param_count() const noexcept {
  std::int64_t s = 0;
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i)
    s += static_cast<std::int64_t>(widths_[i + 1]) * (widths_[i] + 1);
  return s;
}

std::string NetworkShape::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < widths_.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(widths_[i]);
  }
  return out + ")";
}

MlpParams::MlpParams(NetworkShape shape) : shape_(std::move(shape)) {
  const auto& w = shape_.widths();
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    layers_.push_back({Eigen::MatrixXd::Zero(w[i + 1], w[i]), Eigen::VectorXd::Zero(w[i + 1])});
}

MlpParams::MlpParams(NetworkShape shape, std::vector<DenseLayer> layers)
    : shape_(std::move(shape)), layers_(std::move(layers)) {
  const auto& w = shape_.widths();
  if (layers_.size() + 1 != w.size()) throw InvalidArgument("layer count does not match shape");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].weight.rows() != w[i + 1] || layers_[i].weight.cols() != w[i] ||
        layers_[i].bias.size() != w[i + 1])
      throw InvalidArgument("layer " + std::to_string(i) + " dimensions do not match shape");
  }
  if (!all_finite()) throw InvalidArgument("network parameters must be finite");
}

bool MlpParams::all_finite() const {
  return std::all_of(layers_.begin(), layers_.end(), [](const DenseLayer& l) {
    return l.weight.allFinite() && l.bias.allFinite();
  });
}

bool operator==(const MlpParams& a, const MlpParams& b) {
  if (!(a.shape_ == b.shape_)) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    if (a.layers_[i].weight != b.layers_[i].weight || a.layers_[i].bias != b.layers_[i].bias)
      return false;
  }
  return true;
}

Gradients Gradients::zeros_like(const MlpParams& params) {
  Gradients g;
  for (const auto& l : params.layers())
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  return g;
}

bool Gradients::all_finite() const {
  return std::all_of(layers.begin(), layers.end(), [](const DenseLayer& l) {
    return l.weight.allFinite() && l.bias.allFinite();
  });
}

MlpParams init_network(const NetworkShape& shape, PrngStream& rng) {
  MlpParams params(shape);
  for (auto& layer : params.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = rng.uniform(-bound, bound);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = rng.uniform(-bound, bound);
  }
  return params;
}

double forward(const MlpParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.shape().input_dim())
    throw InvalidArgument("input dimension " + std::to_string(x.size()) +
                          " does not match network input " +
                          std::to_string(params.shape().input_dim()));
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  const auto& layers = params.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::VectorXd z = layers[i].weight * a + layers[i].bias;
    a = (i + 1 < layers.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a(0);
}

Eigen::RowVectorXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& xs) {
  if (xs.rows() != params.shape().input_dim())
    throw InvalidArgument("input dimension does not match network input");
  Eigen::MatrixXd a = xs;
  const auto& layers = params.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::MatrixXd z = layers[i].weight * a;
    z.colwise() += layers[i].bias;
    if (i + 1 < layers.size())
      a = z.cwiseMax(0.0);
    else
      a = std::move(z);
  }
  return a.row(0);
}

ForwardCache forward_cached(const MlpParams& params, const Eigen::MatrixXd& xs) {
  if (xs.rows() != params.shape().input_dim())
    throw InvalidArgument("input dimension does not match network input");
  ForwardCache cache;
  const auto& layers = params.layers();
  cache.inputs.reserve(layers.size());
  cache.pre_activations.reserve(layers.size());
  cache.inputs.push_back(xs);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::MatrixXd z = layers[i].weight * cache.inputs.back();
    z.colwise() += layers[i].bias;
    if (i + 1 < layers.size()) cache.inputs.push_back(relu(z));
    cache.pre_activations.push_back(std::move(z));
  }
  return cache;
}

double backward_into(const MlpParams& params, const Eigen::MatrixXd& xs,
                     std::span<const double> ys, const LossSpec& loss, Gradients& grads) {
  check_batch(params, xs, ys.size());
  const ForwardCache cache = forward_cached(params, xs);
  const auto& out = cache.output();
  if (!out.allFinite()) throw DivergenceError("non-finite network output", -1);

  const Eigen::Index m = xs.cols();
  const double inv_m = 1.0 / static_cast<double>(m);
  Eigen::MatrixXd delta(1, m);
  double risk = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    risk += loss_value(loss, out(0, j), ys[jj]);
    delta(0, j) = loss_grad(loss, out(0, j), ys[jj]) * inv_m;
  }
  risk *= inv_m;

  const auto& layers = params.layers();
  if (grads.layers.size() != layers.size()) grads = Gradients::zeros_like(params);
  for (std::size_t k = layers.size(); k-- > 0;) {
    grads.layers[k].weight.noalias() = delta * cache.inputs[k].transpose();
    grads.layers[k].bias = delta.rowwise().sum();
    if (k == 0) break;
    Eigen::MatrixXd back = layers[k].weight.transpose() * delta;
    const auto& z = cache.pre_activations[k - 1];
    delta = (z.array() > 0.0).select(back, 0.0);
  }
  return risk;
}

BackwardResult backward(const MlpParams& params, const Eigen::MatrixXd& xs,
                        std::span<const double> ys, const LossSpec& loss) {
  BackwardResult result;
  result.grads = Gradients::zeros_like(params);
  result.risk = backward_into(params, xs, ys, loss, result.grads);
  return result;
}

PdimBounds pdim_bounds(std::int64_t size, std::int64_t depth, double c_lo, double c_hi) {
  if (depth < 1) throw InvalidArgument("pseudo-dimension bounds need depth >= 1");
  if (size <= depth) throw InvalidArgument("pseudo-dimension bounds need S > D");
  const double s = static_cast<double>(size);
  const double d = static_cast<double>(depth);
  return {c_lo * s * d * std::log(s / d), c_hi * s * d * std::log(s)};
}

PdimBounds pdim_bounds(const NetworkShape& shape, double c_lo, double c_hi) {
  return pdim_bounds(shape.param_count(), shape.depth(), c_lo, c_hi);
}

std::string serialize_model(const MlpParams& params) {
  std::string out;
  out += std::string(kModelTag) + " " + std::to_string(kModelVersion) + "\n";
  out += "widths";
  for (int w : params.shape().widths()) out += " " + std::to_string(w);
  out += "\n";
  int idx = 0;
  for (const auto& layer : params.layers()) {
    out += "layer " + std::to_string(idx++) + "\nweights";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        out += " " + text::format_double(layer.weight(r, c));
    out += "\nbiases";
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
      out += " " + text::format_double(layer.bias(r));
    out += "\n";
  }
  return out;
}

MlpParams deserialize_model(std::string_view text_in) {
  std::istringstream in{std::string(text_in)};
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != kModelTag) throw InvalidArgument("not a model record (missing '" + std::string(kModelTag) + "' tag)");
  if (version != kModelVersion)
    throw InvalidArgument("unsupported model format version " + std::to_string(version));

  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  auto tokens = text::split(line, ' ');
  if (tokens.empty() || tokens[0] != "widths") throw InvalidArgument("model record: expected widths line");
  std::vector<int> widths;
  for (std::size_t i = 1; i < tokens.size(); ++i) widths.push_back(std::stoi(tokens[i]));
  NetworkShape shape(widths);

  std::vector<DenseLayer> layers;
  for (int k = 0; k < shape.linear_layers(); ++k) {
    std::getline(in, line);
    if (line != "layer " + std::to_string(k)) throw InvalidArgument("model record: expected layer " + std::to_string(k));
    const int rows = widths[static_cast<std::size_t>(k) + 1];
    const int cols = widths[static_cast<std::size_t>(k)];
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};

    std::getline(in, line);
    tokens = text::split(line, ' ');
    if (tokens.empty() || tokens[0] != "weights" ||
        tokens.size() != static_cast<std::size_t>(rows) * cols + 1)
      throw InvalidArgument("model record: bad weights for layer " + std::to_string(k));
    std::size_t t = 1;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) layer.weight(r, c) = text::parse_double(tokens[t++]);

    std::getline(in, line);
    tokens = text::split(line, ' ');
    if (tokens.empty() || tokens[0] != "biases" || tokens.size() != static_cast<std::size_t>(rows) + 1)
      throw InvalidArgument("model record: bad biases for layer " + std::to_string(k));
    for (int r = 0; r < rows; ++r) layer.bias(r) = text::parse_double(tokens[static_cast<std::size_t>(r) + 1]);
    layers.push_back(std::move(layer));
  }
  return MlpParams(std::move(shape), std::move(layers));
}

void save_model(const MlpParams& params, const std::string& path) {
  text::write_file(path, serialize_model(params));
}

MlpParams load_model(const std::string& path) { return deserialize_model(text::read_file(path)); }

}  // namespace robreg
