#pragma once

#include <cmath>
#include <cstdint>

namespace rtxc::detail {

// splitmix64: tiny, fast, and identical on every platform. All phantom and
// noise generation goes through this so that artifacts are reproducible
// byte-for-byte from the seed alone.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller (self-contained; std::normal_distribution
  // is not pinned across standard libraries)
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }
};

// Derive an independent substream seed from (seed, a, b). Used to give every
// (frame, coil) its own noise stream so parallel and serial fills agree.
inline uint64_t substream(uint64_t seed, uint64_t a, uint64_t b = 0) {
  SplitMix64 mix(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL));
  mix.next();
  return mix.next();
}

}  // namespace rtxc::detail
