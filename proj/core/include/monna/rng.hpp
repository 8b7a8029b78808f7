#pragma once

#include <cstdint>
#include <random>

namespace monna {

using Rng = std::mt19937_64;

/// Stream identifiers used by the simulator. Adding a new kind never shifts
/// the seeds of existing streams.
enum class StreamKind : std::uint64_t {
    Objective = 1,   // objective construction (matrix, centers, datasets)
    Gradient = 2,    // per-node stochastic gradient noise; sub-id = node
    Delivery = 3,    // per-receiver delivery sampling; sub-id = node
    Attack = 4,      // adversary randomness
    Output = 5,      // uniform output-model sampling; sub-id = node
    Audit = 6,       // reduction audit trials; sub-id = trial
    SigningKeys = 7, // per-node signing keys; sub-id = node
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// (seed, stream, sub-id) -> independent 64-bit seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamKind kind,
                                    std::uint64_t sub_id = 0) noexcept {
    return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(kind)) ^ mix64(sub_id + 1));
}

inline Rng make_stream(std::uint64_t seed, StreamKind kind, std::uint64_t sub_id = 0) {
    return Rng(derive_seed(seed, kind, sub_id));
}

}  // namespace monna
