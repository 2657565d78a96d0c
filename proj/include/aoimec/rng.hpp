#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aoimec {

/// SplitMix64 finalizer; used to turn stream ids into well-mixed seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent substream seed: master ^ hash(stream-id), re-mixed.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream_id) {
  return splitmix64(master ^ splitmix64(stream_id));
}

/// Seedable 64-bit generator with the samplers the simulator needs.
/// Uniform bits come from std::mt19937_64 (algorithm fixed by the standard);
/// the exponential and Bernoulli transforms are done by hand so draws are a
/// pure function of the engine state.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace aoimec
