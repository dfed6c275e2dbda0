#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace srtrl {

using Rng = std::mt19937_64;

/// Independent consumers of one run's master seed. Adding a consumer never
/// shifts the stream another consumer sees.
enum class RngStream : std::uint64_t {
    init = 1,
    mask = 2,
    task = 3,
    uoro = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t master_seed, RngStream stream) {
    const auto tag = static_cast<std::uint64_t>(stream);
    return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(tag * 0x632be59bd9b4e019ULL)));
}

}  // namespace srtrl
