#pragma once

#include <cstdint>
#include <random>

namespace conas {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Sub-seed for (stream, index) under a master seed. Every random stream in
/// the library is keyed this way, so a run is a pure function of its master
/// seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) noexcept;

/// Stream tags used with derive_seed.
namespace streams {
inline constexpr std::uint64_t kStage = 1;
inline constexpr std::uint64_t kSampling = 2;
inline constexpr std::uint64_t kRepair = 3;
inline constexpr std::uint64_t kOracle = 4;
inline constexpr std::uint64_t kNoise = 5;
inline constexpr std::uint64_t kPhasePlant = 6;
inline constexpr std::uint64_t kPhaseSampling = 7;
}  // namespace streams

}  // namespace conas
