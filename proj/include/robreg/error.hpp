// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace robreg {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss, gradient, or parameter.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(what + (epoch >= 0 ? " (epoch " + std::to_string(epoch) + ")" : "")),
        epoch_(epoch) {}

  /// Zero-based epoch in which divergence was detected, or -1 if unknown.
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// An experiment configuration failed schema validation.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration";
    for (const auto& p : items) out += "\n  - " + p;
    return out;
  }
  std::vector<std::string> problems_;
};

/// File read/write failure; the message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace robreg
