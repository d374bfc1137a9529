#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace zeno {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent generator for (seed, component, index). Changing the number of
/// shots never perturbs the streams of earlier shots.
inline Rng substream(std::uint64_t seed, std::uint64_t component, std::uint64_t index = 0) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ mix64(component + 0x632be59bd9b4e019ULL));
  s = mix64(s ^ mix64(index + 0x85157af5ULL));
  return Rng(s);
}

/// Standard normal deviate via Box-Muller on 53-bit uniforms; fixed so that
/// streams are identical across standard library implementations.
inline double standard_normal(Rng& rng) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  auto uniform = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

inline double uniform01(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace zeno
