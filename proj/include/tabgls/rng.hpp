#pragma once

#include <cstdint>
#include <random>

namespace tabgls {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the ordinal-th item of a run; independent of processing order.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t ordinal) noexcept {
    return splitmix64(seed ^ splitmix64(ordinal));
}

/// mt19937_64 with a portable bounded draw (std::uniform_int_distribution
/// differs between standard libraries).
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tabgls
