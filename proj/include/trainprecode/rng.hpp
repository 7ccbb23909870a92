// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace trainprecode::rng {

// Counter-based generation: every variate is a pure function of (seed, indices),
// so results do not depend on evaluation or thread order.

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream seed for substream `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index ^ 0x632be59bd9b4e019ULL));
}

/// Uniform in (0,1]; never returns 0 so it is safe under log().
inline double to_unit_open(std::uint64_t x) {
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

/// Circularly-symmetric complex Gaussian, unit variance (Re and Im each N(0,1/2)),
/// addressed by (stream, i, j).
inline std::complex<double> complex_normal(std::uint64_t stream, std::uint64_t i, std::uint64_t j) {
  const std::uint64_t key = mix64(stream ^ mix64((i << 32) ^ j ^ 0x9ddfea08eb382d69ULL));
  const double u1 = to_unit_open(key);
  const double u2 = to_unit_open(mix64(key ^ 0xa0761d6478bd642fULL));
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double ang = 6.283185307179586476925286766559 * u2;
  // 1/sqrt(2) per component gives E|w|^2 = 1
  const double c = 0.70710678118654752440;
  return {c * mag * std::cos(ang), c * mag * std::sin(ang)};
}

}  // namespace trainprecode::rng
