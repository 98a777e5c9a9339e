#pragma once

#include <cstdint>
#include <random>

namespace cbandits {

/// splitmix64 finalizer. Used for run-seed derivation and nothing else.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random stream. Each run/worker owns its own instance; the library
/// never keeps a hidden global generator. Draws are reproducible for a given
/// seed within this implementation (mt19937_64 plus hand-rolled mapping, so
/// no reliance on std::distribution internals).
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53 bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Degenerate probabilities consume no randomness.
  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  /// Uniform integer in [0, bound). Modulo bias is irrelevant at the bounds
  /// used here (test-instance generation only).
  std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

 private:
  std::mt19937_64 engine_;
};

/// Fixed avalanche mix of the canonical run key (master seed, agent id,
/// horizon, repetition index). Distinct keys give uncorrelated streams.
inline std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t agent_id,
                                     std::uint64_t horizon, std::uint64_t repetition) {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ agent_id);
  h = mix64(h ^ horizon);
  h = mix64(h ^ repetition);
  return h;
}

}  // namespace cbandits
