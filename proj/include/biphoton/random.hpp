#pragma once

#include <concepts>
#include <cstdint>
#include <random>

namespace biphoton {

/// Default random stream. The mt19937_64 output sequence is fixed by the
/// standard, so a seed gives the same draws on every toolchain.
using RandomStream = std::mt19937_64;

template <class G>
concept BitStream64 = std::uniform_random_bit_generator<G> &&
                      std::same_as<typename G::result_type, std::uint64_t> &&
                      (G::min() == 0) && (G::max() == UINT64_MAX);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
template <BitStream64 G>
double unit_uniform(G &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Fair coin from the top bit of one draw.
template <BitStream64 G>
bool coin(G &rng) {
    return (rng() >> 63) != 0;
}

/// Seed for replication `index` of a batch started from `base`.
constexpr std::uint64_t replication_seed(std::uint64_t base, std::uint64_t index) {
    return base + index;
}

}  // namespace biphoton
