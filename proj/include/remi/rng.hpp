#pragma once

#include <cstdint>

namespace remi {

// splitmix64 step; used to derive independent sub-stream seeds from one
// master seed so that adding a consumer never shifts another one's stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

// Named sub-streams of the run seed.
enum class SeedStream : std::uint64_t {
    Simulation = 1,
    FoldShuffle = 2,
};

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream s) {
    return derive_seed(master, static_cast<std::uint64_t>(s));
}

} // namespace remi
