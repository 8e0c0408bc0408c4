#include "gtasep/rng.hpp"

namespace gtasep {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (stream * 0xd1b54a32d192ed03ULL);
    std::uint64_t b = splitmix64(s);
    s = b ^ (step * 0xaef17502108ef2d9ULL);
    return splitmix64(s);
}

}  // namespace gtasep
