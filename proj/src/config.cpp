// SPDX-License-Identifier: Apache-2.0
#include "robreg/config.hpp"

#include <cmath>
#include <limits>

#include "robreg/error.hpp"
#include "robreg/text.hpp"

namespace robreg {

namespace {

Json losses_json(const std::vector<LossSpec>& losses) {
  Json out = Json::array();
  for (const auto& l : losses) out.push_back(loss_to_json(l));
  return out;
}

Json noise_to_json(const NoiseModel& noise) {
  if (noise.kind != NoiseKind::Mixture) return noise.name();
  return Json{{"kind", "mixture"}, {"xi", noise.xi}, {"sd2", noise.sd2}};
}

NoiseModel noise_from_json(const Json& j) {
  if (j.is_string()) return NoiseModel{parse_noise_kind(j.get<std::string>())};
  if (!j.is_object() || !j.contains("kind"))
    throw InvalidArgument("expected a noise name or an object with \"kind\"");
  for (const auto& [key, value] : j.items())
    if (key != "kind" && key != "xi" && key != "sd2")
      throw InvalidArgument("unknown noise key '" + key + "'");
  NoiseModel m{parse_noise_kind(j.at("kind").get<std::string>())};
  if (j.contains("xi")) m.xi = j.at("xi").get<double>();
  if (j.contains("sd2")) m.sd2 = j.at("sd2").get<double>();
  m.validate();
  return m;
}

void merge_into(Json& base, const Json& user, const std::string& prefix,
                std::vector<std::string>& problems) {
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) {
      problems.push_back("unknown key '" + path + "'");
      continue;
    }
    Json& slot = base[key];
    if (slot.is_object() && value.is_object()) {
      merge_into(slot, value, path, problems);
    } else if (slot.is_object()) {
      problems.push_back("'" + path + "' must be an object");
    } else {
      slot = value;
    }
  }
}

template <class T>
T field(const Json& doc, const char* path, std::vector<std::string>& problems, T fallback) {
  const Json* node = &doc;
  std::string_view rest = path;
  while (!rest.empty()) {
    const auto dot = rest.find('.');
    const std::string key(rest.substr(0, dot));
    if (!node->is_object() || !node->contains(key)) {
      problems.push_back(std::string("missing key '") + path + "'");
      return fallback;
    }
    node = &node->at(key);
    rest = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);
  }
  try {
    if constexpr (std::is_same_v<T, int>) {
      if (!node->is_number_integer()) throw InvalidArgument("expected an integer");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!node->is_number()) throw InvalidArgument("expected a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!node->is_boolean()) throw InvalidArgument("expected true or false");
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!node->is_number_integer() || node->get<std::int64_t>() < 0)
        throw InvalidArgument("expected a non-negative integer");
    }
    return node->get<T>();
  } catch (const std::exception& e) {
    problems.push_back(std::string(path) + ": " + e.what());
    return fallback;
  }
}

template <class T, class Fn>
std::vector<T> list_field(const Json& doc, const char* key, std::vector<std::string>& problems,
                          Fn&& convert) {
  std::vector<T> out;
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    problems.push_back(std::string(key) + ": expected a list");
    return out;
  }
  std::size_t i = 0;
  for (const auto& item : doc.at(key)) {
    try {
      out.push_back(convert(item));
    } catch (const std::exception& e) {
      problems.push_back(std::string(key) + "[" + std::to_string(i) + "]: " + e.what());
    }
    ++i;
  }
  return out;
}

}  // namespace

LossSpec loss_from_json(const Json& j) {
  if (j.is_string()) return LossSpec::with_default_hyper(parse_loss_kind(j.get<std::string>()));
  if (!j.is_object() || !j.contains("kind"))
    throw InvalidArgument("expected a loss name or an object with \"kind\"");
  for (const auto& [key, value] : j.items())
    if (key != "kind" && key != "hyper") throw InvalidArgument("unknown loss key '" + key + "'");
  const LossKind kind = parse_loss_kind(j.at("kind").get<std::string>());
  if (!j.contains("hyper")) return LossSpec::with_default_hyper(kind);
  return LossSpec(kind, j.at("hyper").get<double>());
}

Json loss_to_json(const LossSpec& loss) {
  if (!loss.has_hyper()) return std::string(to_string(loss.kind()));
  return Json{{"kind", std::string(to_string(loss.kind()))}, {"hyper", loss.hyper()}};
}

double parse_p(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    return text::parse_double(s);
  }
  if (j.is_number()) return j.get<double>();
  throw InvalidArgument("p must be a number or \"inf\"");
}

Json default_config_json() {
  ExperimentConfig cfg;
  cfg.noises = {NoiseModel::normal(), NoiseModel::student_t2(), NoiseModel::cauchy(),
                NoiseModel::mixture()};
  cfg.train_losses = {LossSpec::ls(), LossSpec::lad(), LossSpec::huber(), LossSpec::cauchy(),
                      LossSpec::tukey()};
  cfg.test_losses = cfg.train_losses;
  return config_to_json(cfg);
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["seed"] = cfg.seed;
  j["target"] = {{"kind", std::string(to_string(cfg.target.kind()))},
                 {"d", cfg.target.dim()},
                 {"ka_seed", cfg.target.kind() == TargetKind::KA ? cfg.target.seed() : 2021}};
  j["inputs"] = {
      {"kind", cfg.inputs.kind == InputDesign::Kind::Manifold ? "manifold" : "uniform"},
      {"d_manifold", cfg.inputs.d_manifold},
      {"rho", cfg.inputs.rho}};
  Json noises = Json::array();
  for (const auto& n : cfg.noises) noises.push_back(noise_to_json(n));
  j["noises"] = noises;
  j["train_losses"] = losses_json(cfg.train_losses);
  j["test_losses"] = losses_json(cfg.test_losses);
  j["n"] = cfg.ns;
  j["test_size"] = cfg.test_size;
  j["replications"] = cfg.replications;
  j["hidden"] = cfg.hidden;
  const auto& t = cfg.train;
  j["train"] = {{"lr", t.learning_rate},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"eps", t.eps},
                {"epochs", t.epochs},
                {"batch_fraction", t.batch_fraction},
                {"shuffle", t.shuffle},
                {"allow_short_schedule", t.allow_short_schedule}};
  j["clamp_eval"] = cfg.clamp_eval;
  j["clamp_bound"] = cfg.clamp_bound;
  j["excess"] = cfg.excess;
  return j;
}

void apply_override(Json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError({"override '" + std::string(assignment) + "' is not key=value"});
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  Json* node = &config;
  std::string_view rest = key;
  while (true) {
    const auto dot = rest.find('.');
    const std::string part(rest.substr(0, dot));
    if (!node->is_object() || !node->contains(part))
      throw ConfigError({"override references unknown key '" + key + "'"});
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    rest = rest.substr(dot + 1);
  }
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  *node = std::move(value);
}

Json merge_config(const Json& user, const std::vector<std::string>& overrides) {
  Json merged = default_config_json();
  std::vector<std::string> problems;
  if (!user.is_object()) {
    problems.push_back("config root must be a JSON object");
  } else {
    if (!user.contains("schema_version")) {
      problems.push_back("missing key 'schema_version'");
    } else if (user.at("schema_version") != kConfigSchemaVersion) {
      problems.push_back("unsupported schema_version " + user.at("schema_version").dump() +
                         " (expected " + std::to_string(kConfigSchemaVersion) + ")");
    }
    merge_into(merged, user, "", problems);
  }
  if (!problems.empty()) {
    // Report value problems in the same pass as unknown keys.
    try {
      config_from_json(merged);
    } catch (const ConfigError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
    throw ConfigError(std::move(problems));
  }
  for (const auto& o : overrides) apply_override(merged, o);
  return merged;
}

ExperimentConfig config_from_json(const Json& doc) {
  std::vector<std::string> problems;
  ExperimentConfig cfg;
  cfg.seed = field<std::uint64_t>(doc, "seed", problems, cfg.seed);

  const std::string kind = field<std::string>(doc, "target.kind", problems, "blocks");
  const int d = field<int>(doc, "target.d", problems, 1);
  const auto ka_seed = field<std::uint64_t>(doc, "target.ka_seed", problems, 2021);
  try {
    const TargetKind tk = parse_target_kind(kind);
    if (tk == TargetKind::KA) {
      cfg.target = ka_target(d, ka_seed);
    } else if (tk == TargetKind::Custom) {
      problems.push_back("target.kind: custom targets are not available from a config file");
    } else {
      if (d != 1) problems.push_back("target.d: " + kind + " is univariate (d must be 1)");
      cfg.target = TargetFn::dj(tk);
    }
  } catch (const std::exception& e) {
    problems.push_back(std::string("target: ") + e.what());
  }

  const std::string ikind = field<std::string>(doc, "inputs.kind", problems, "uniform");
  if (ikind == "manifold") {
    cfg.inputs = InputDesign::manifold(field<int>(doc, "inputs.d_manifold", problems, 1),
                                       field<double>(doc, "inputs.rho", problems, 0.0));
  } else if (ikind != "uniform") {
    problems.push_back("inputs.kind: expected \"uniform\" or \"manifold\"");
  }

  cfg.noises = list_field<NoiseModel>(doc, "noises", problems, noise_from_json);
  cfg.train_losses = list_field<LossSpec>(doc, "train_losses", problems, loss_from_json);
  cfg.test_losses = list_field<LossSpec>(doc, "test_losses", problems, loss_from_json);
  cfg.ns = list_field<int>(doc, "n", problems, [](const Json& j) {
    if (!j.is_number_integer()) throw InvalidArgument("expected an integer");
    return j.get<int>();
  });
  cfg.hidden = list_field<int>(doc, "hidden", problems, [](const Json& j) {
    if (!j.is_number_integer()) throw InvalidArgument("expected an integer");
    return j.get<int>();
  });
  cfg.test_size = field<int>(doc, "test_size", problems, cfg.test_size);
  cfg.replications = field<int>(doc, "replications", problems, cfg.replications);
  auto& t = cfg.train;
  t.learning_rate = field<double>(doc, "train.lr", problems, t.learning_rate);
  t.beta1 = field<double>(doc, "train.beta1", problems, t.beta1);
  t.beta2 = field<double>(doc, "train.beta2", problems, t.beta2);
  t.eps = field<double>(doc, "train.eps", problems, t.eps);
  t.epochs = field<int>(doc, "train.epochs", problems, t.epochs);
  t.batch_fraction = field<double>(doc, "train.batch_fraction", problems, t.batch_fraction);
  t.shuffle = field<bool>(doc, "train.shuffle", problems, t.shuffle);
  t.allow_short_schedule =
      field<bool>(doc, "train.allow_short_schedule", problems, t.allow_short_schedule);
  cfg.clamp_eval = field<bool>(doc, "clamp_eval", problems, cfg.clamp_eval);
  cfg.clamp_bound = field<double>(doc, "clamp_bound", problems, cfg.clamp_bound);
  cfg.excess = field<bool>(doc, "excess", problems, cfg.excess);

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json user = Json{{"schema_version", kConfigSchemaVersion}};
  if (!path.empty()) {
    const std::string text = text::read_file(path);
    user = Json::parse(text, nullptr, false);
    if (user.is_discarded()) throw ConfigError({path + ": not valid JSON"});
  }
  return config_from_json(merge_config(user, overrides));
}

}  // namespace robreg
