#pragma once

#include <cstdint>

namespace periheat::detail {

/// splitmix64; output stream depends only on the seed, not on any library's
/// distribution internals, so artifacts are reproducible bit for bit.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// uniform in [0,1)
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// uniform in [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// uniform in [-1,1)
    double symmetric() { return uniform(-1.0, 1.0); }

private:
    std::uint64_t state_;
};

} // namespace periheat::detail
