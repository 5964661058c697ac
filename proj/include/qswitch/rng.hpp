#pragma once

#include <cstdint>
#include <random>

namespace qswitch {

/// What a random stream is used for. Each (purpose, entity) pair gets its
/// own stream so that changing the policy never shifts arrival randomness.
enum class StreamPurpose : std::uint64_t {
  vertex_arrival = 1,
  vertex_decoherence = 2,
  edge_arrival = 3,
  matching_sample = 4,
  test = 99,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream keyed by (root seed, purpose, entity index).
  static RandomStream derive(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    h = splitmix64(h ^ index);
    return RandomStream(h);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> d(mean);
    return d(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qswitch
