// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace robreg::text {

/// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);

/// Parses a double written by format_double (also accepts "inf", "-inf", "nan").
double parse_double(std::string_view token);

std::vector<std::string> split(std::string_view line, char sep);

/// 64-bit FNV-1a hash, used for stable stream keys and config digests.
std::uint64_t fnv1a(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace robreg::text
