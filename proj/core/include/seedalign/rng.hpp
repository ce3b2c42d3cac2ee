// Copyright 2026 The seedalign Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace seedalign {

/// Deterministic pseudo-random stream: xoshiro256** seeded through SplitMix64.
///
/// Every derived quantity (uniform reals, Gaussians, bounded integers) is
/// computed here rather than through <random> distributions, whose output is
/// implementation-defined. The same seed therefore produces the same stream
/// with any compiler and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Raw 64-bit output.
  std::uint64_t next_u64() noexcept;

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept;

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Consumes two uniforms per pair of outputs.
  double normal() noexcept;

  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Fisher-Yates shuffle of an index range.
  void shuffle(std::span<std::size_t> values) noexcept;

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; also used to derive independent child seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace seedalign
