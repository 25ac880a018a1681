#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ncreg::rng {

// splitmix64, used to spread (seed, stream indices) into well-separated
// mt19937_64 seeds. Engine output is specified by the standard, and all
// variates below are built from raw engine output, so every stream is
// bit-reproducible across platforms. std::*_distribution is avoided on
// purpose (its output is implementation-defined).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a = 0,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = seed;
  std::uint64_t mixed = splitmix64(s);
  s ^= 0x5851f42d4c957f2dULL + a;
  mixed ^= splitmix64(s);
  s ^= 0x14057b7ef767814fULL + b;
  mixed ^= splitmix64(s);
  s ^= 0x27bb2ee687b0b0fdULL + c;
  mixed ^= splitmix64(s);
  return std::mt19937_64(mixed);
}

// uniform on (0, 1]; never 0 so log() is safe
inline double uniform01(std::mt19937_64& g) {
  return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Box-Muller, cosine branch only: two engine draws per variate, stateless
inline double normal(std::mt19937_64& g) {
  double u1 = uniform01(g);
  double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// bounded integer by modulo; bias is < n/2^64, irrelevant for shuffling
inline std::size_t bounded(std::mt19937_64& g, std::size_t n) {
  return static_cast<std::size_t>(g() % static_cast<std::uint64_t>(n));
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded(g, i)]);
  }
}

}  // namespace ncreg::rng
