#pragma once

#include <cmath>
#include <cstdint>

namespace mfhjb {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic counter-less random stream; independent of scheduling.
struct RngStream {
    std::uint64_t state;
    explicit RngStream(std::uint64_t seed) : state(seed) {}
    std::uint64_t next_u64() {
        state = splitmix64(state);
        return state;
    }
    double uniform() {  // in (0, 1)
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

}  // namespace mfhjb
