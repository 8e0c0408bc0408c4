#pragma once

#include <cstdint>

namespace gtasep {

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t step);

// Counter-based stream: the state at (seed, stream, step) is a pure function
// of the key, so any step can be regenerated independently.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) { at_step(0); }

    void at_step(std::uint64_t step) { state_ = mix_key(seed_, stream_, step); }
    std::uint64_t next() { return splitmix64(state_); }
    // Uniform in [0, 1).
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_ = 0;
};

}  // namespace gtasep
