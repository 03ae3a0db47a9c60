#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "alsel/errors.hpp"

// Deterministic draws built directly on the mt19937_64 bit stream. The
// engine's output sequence is pinned by the standard; std::*_distribution
// adapters are not, so every distribution used here is spelled out. One seed
// therefore produces one bit-identical result on any conforming platform.

namespace alsel {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1), 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1]; safe as a log() argument.
inline double uniform_unit_positive(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Rejects the biased tail of the 64-bit range.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) {
    throw ValidationError(ValidationIssue::InvalidArgument, "uniform_index over empty range");
  }
  const std::uint64_t bound = n;
  const std::uint64_t reject_below = (-bound) % bound;  // 2^64 mod n
  std::uint64_t draw = rng();
  while (draw < reject_below) draw = rng();
  return static_cast<std::size_t>(draw % bound);
}

/// Standard normal via Box-Muller; consumes exactly two engine outputs.
inline double standard_normal(Rng& rng) {
  const double u1 = uniform_unit_positive(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Draws an index with probability proportional to weights[i]. Weights must
/// be nonnegative with a positive sum; zero-weight entries are never drawn.
/// Consumes exactly one engine output.
inline std::size_t weighted_index(Rng& rng, std::span<const double> weights) {
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    cumulative[i] = total;
  }
  if (!(total > 0.0)) {
    throw ValidationError(ValidationIssue::InvalidArgument,
                          "weighted_index requires a positive weight sum");
  }
  const double u = uniform_unit(rng) * total;
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  // u can round up to the total when the last 53-bit fraction is drawn; a
  // zero-weight entry is still impossible because its cumulative value
  // equals its predecessor's.
  if (it == cumulative.end()) {
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) return i;
    }
  }
  return static_cast<std::size_t>(it - cumulative.begin());
}

/// Derives an independent stream seed from a base seed (splitmix64 finalizer
/// over base + golden-ratio increments).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + (stream + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace alsel
