// SPDX-License-Identifier: Apache-2.0
//
// JSON experiment configs: defaults, validation with itemized errors, dotted
// overrides, and the echo written next to every report.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "robreg/harness.hpp"

namespace robreg {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigSchemaVersion = 1;

/// Every recognised key with its default value.
Json default_config_json();

/// Sets a dotted key ("train.lr=0.005") in `config`. The key must already exist.
/// The value is read as JSON when it parses, otherwise as a string.
/// Throws ConfigError.
void apply_override(Json& config, std::string_view assignment);

/// Merges `user` over the defaults, rejecting unknown keys, and applies overrides.
Json merge_config(const Json& user, const std::vector<std::string>& overrides = {});

/// Builds and validates an ExperimentConfig from a merged document. Collects
/// every problem before throwing ConfigError.
ExperimentConfig config_from_json(const Json& merged);

/// Inverse of config_from_json: a complete document that reloads to `cfg`.
Json config_to_json(const ExperimentConfig& cfg);

/// Reads, merges and validates a config file. An empty path means defaults only.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// LossSpec from "huber" or {"kind": "huber", "hyper": 1.345}.
LossSpec loss_from_json(const Json& j);
Json loss_to_json(const LossSpec& loss);

/// RateSpec.p accepts a number or the string "inf".
double parse_p(const Json& j);

}  // namespace robreg
