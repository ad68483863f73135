#pragma once

#include <cmath>
#include <cstdint>

namespace descent {

// Counter-based SplitMix64. The i-th output of a stream with seed s is
//     mix64(s + (i+1) * 0x9E3779B97F4A7C15)
// where mix64 is the SplitMix64 finalizer (Steele, Lea & Flood 2014).
// State is (seed, counter), so streams are pure values: copying a state
// replays the stream, and substreams are derived by hashing, not by
// advancing, which makes Monte Carlo draws order-independent.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
};

inline std::uint64_t next_u64(RngState& state) {
  state.counter += 1;
  return mix64(state.seed + state.counter * kGoldenGamma);
}

/// Uniform double in [0, 1), 53 random bits.
inline double next_uniform01(RngState& state) {
  return static_cast<double>(next_u64(state) >> 11) * 0x1.0p-53;
}

/// Uniform double in the open interval (0, 1); safe under log/pow.
inline double next_open01(RngState& state) {
  return (static_cast<double>(next_u64(state) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; consumes exactly two draws.
inline double next_normal(RngState& state) {
  const double u = next_open01(state);
  const double v = next_uniform01(state);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

/// Independent substream for (master seed, index), e.g. one per iteration
/// of a run. Double mixing decorrelates nearby seeds from nearby indices.
inline RngState substream(std::uint64_t master_seed, std::uint64_t index) {
  return {mix64(mix64(master_seed) ^ ((index + 1) * kGoldenGamma)), 0};
}

}  // namespace descent
