#pragma once

// SplitMix64 used as a counter-based stream generator: every draw is a fixed
// bijective hash of (seed, stream, counter), so replicate r can own stream r
// and results do not depend on scheduling.

#include <cstdint>

#include "sensi/normal.hpp"

namespace sensi {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(splitmix64(splitmix64(seed) ^ (0x9E3779B97F4A7C15ULL * (stream + 1)))) {}

    std::uint64_t next_u64() { return splitmix64(key_ ^ counter_++); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1), usable as a CDF argument.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the inverse CDF (deterministic, no rejection loop).
    double normal() { return normal_quantile(uniform_open()); }

    // Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace sensi
