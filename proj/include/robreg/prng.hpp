// SPDX-License-Identifier: Apache-2.0
//
// Deterministic, splittable pseudo-random streams.
//
// Each stream is a xoshiro256** generator whose 256-bit state is filled by
// SplitMix64 from a mix of (seed, stream id). Children are derived either by
// split(), which consumes one draw from the parent, or by substream(key),
// which does not touch the parent and is therefore order independent.
//
// The u64 -> double mapping is fixed: uniform() = ((x >> 11) + 0.5) * 2^-53,
// which lies strictly inside (0, 1).
#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace robreg {

class PrngStream {
 public:
  explicit PrngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Standard normal via Box-Muller (one output per pair of uniforms).
  double normal() noexcept;

  /// Child stream; advances this stream by one draw.
  PrngStream split() noexcept;

  /// Child stream keyed by `key`; does not advance this stream.
  PrngStream substream(std::uint64_t key) const noexcept;
  PrngStream substream(std::string_view key) const noexcept;

  friend bool operator==(const PrngStream&, const PrngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_;
};

/// SplitMix64 finalizer; also used for seeding.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace robreg
