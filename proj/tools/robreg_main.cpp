// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "robreg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return robreg::run_cli(args, std::cout, std::cerr);
}
