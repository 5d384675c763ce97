#pragma once

#include <cstdint>
#include <random>

namespace tdac {

using Rng = std::mt19937_64;

// Independent stream for (seed, index); used wherever work is split per
// sample or per tree.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(domain)};
    return Rng(seq);
}

}  // namespace tdac
