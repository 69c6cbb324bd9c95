#pragma once

#include <cstdint>
#include <random>

namespace tribell {

/// One SplitMix64 step; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of substream `stream` under `master`. Streams are independent of how
/// many siblings are drawn, so adding work never reshuffles earlier streams.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 substream(std::uint64_t master, std::uint64_t stream) {
    return std::mt19937_64(substream_seed(master, stream));
}

}  // namespace tribell
