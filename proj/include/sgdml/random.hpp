#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace sgdml {

// mt19937_64 output is fixed by the standard, so everything built on it here
// is reproducible across standard library implementations.
using Rng = std::mt19937_64;

/// Independent sub-stream seeds (splitmix64 mix of seed and stream id).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform integer in [0, n) by rejection. Consumes no randomness when n == 1.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Uniform double in [0, 1) with 53 random bits. Consumes exactly one draw.
double uniform01(Rng& rng);

/// Bernoulli(p) from a single uniform draw; p is clamped to [0, 1].
bool bernoulli(Rng& rng, double p);

// Stream ids used by the CLI and the training loops.
inline constexpr std::uint64_t kSplitStream = 1;
inline constexpr std::uint64_t kTripletStream = 2;
inline constexpr std::uint64_t kOptimizerStream = 3;
inline constexpr std::uint64_t kWarmupStream = 4;
inline constexpr std::uint64_t kSyntheticStream = 5;

}  // namespace sgdml
