#pragma once

#include <cstdint>

namespace dqm {

// Counter-based random stream: every draw is a pure function of
// (seed, stream, counter), so results do not depend on evaluation order
// and independent consumers can share a seed without coordination.

constexpr std::uint64_t rng_golden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t rng_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t keyed_word(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t counter) {
    std::uint64_t h = rng_finalize(seed + rng_golden);
    h = rng_finalize(h ^ (stream * 0xd1342543de82ef95ull + rng_golden));
    h = rng_finalize(h ^ (counter * 0x2545f4914f6cdd1dull + rng_golden));
    return h;
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double keyed_uniform(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t counter) {
    return static_cast<double>(keyed_word(seed, stream, counter) >> 11) *
           0x1.0p-53;
}

} // namespace dqm
