#pragma once

#include <cstdint>
#include <random>

namespace rssloc {

// SplitMix64 finalizer; used to derive independent stream keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Key for the stream `index` of a run seeded with `seed`. Streams derived
// this way are independent, so trials can run on any number of workers
// without sequence coupling.
inline std::uint64_t derive_stream_key(std::uint64_t seed,
                                       std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 1));
}

/// Deterministic random stream. The engine is the standardized mt19937_64
/// and all variate transforms are explicit, so sequences are bit-identical
/// across platforms and standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : engine_(key) {}

  static RngStream derive(std::uint64_t seed, std::uint64_t index) {
    return RngStream(derive_stream_key(seed, index));
  }

  // Uniform in (0, 1]: 53-bit mantissa from the top engine bits.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % range);
  }

  // Standard normal via Box-Muller (two engine draws per variate).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rssloc
