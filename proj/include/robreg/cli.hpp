// SPDX-License-Identifier: Apache-2.0
//
// The robreg command line: gen, train, table, sweep, design, bounds, ren,
// fitplot and traceplot.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace robreg {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kRuntime = 1;
inline constexpr int kPartial = 2;
inline constexpr int kUsage = 64;
inline constexpr int kConfig = 65;
}  // namespace exit_code

/// Parses `args` (without the program name) and runs the subcommand.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robreg
