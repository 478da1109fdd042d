#pragma once

#include <cstdint>

namespace flowgan {

// SplitMix64 step; used to fan one run seed out into independent per-stage seeds.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream ids, fixed so that every stage's randomness is reproducible in isolation.
namespace seed_stream {
inline constexpr std::uint64_t generator_init = 1;
inline constexpr std::uint64_t discriminator_init = 2;
inline constexpr std::uint64_t batch_order = 3;
inline constexpr std::uint64_t motion_pairs = 4;
inline constexpr std::uint64_t reference_subsample = 5;
inline constexpr std::uint64_t dataset_split = 6;
inline constexpr std::uint64_t synthetic_video = 7;
inline constexpr std::uint64_t bandwidth_subsample = 8;
} // namespace seed_stream

} // namespace flowgan
