// Copyright (C) 2026 the posekit authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace posekit {

/// Counter-based pseudo-random generator (SplitMix64). The state advances by
/// a fixed Weyl increment and each output is a bijective mix of the counter,
/// so streams are reproducible bit-for-bit across platforms for a given seed.
/// Gaussian samples use the Box-Muller transform (cosine branch, two uniforms
/// per draw) so the draw count per sample is fixed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller: sqrt(-2 ln u1) * cos(2 pi u2).
  double normal() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // ln(0) guard; occurs with probability 2^-53
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Uniform direction on the unit sphere: z uniform in [-1,1], azimuth
  /// uniform in [0, 2 pi). Exactly two draws per vector.
  void unit_vector3(double out[3]) {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 6.283185307179586476925286766559);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    out[0] = r * std::cos(phi);
    out[1] = r * std::sin(phi);
    out[2] = z;
  }

 private:
  std::uint64_t state_;
};

}  // namespace posekit
