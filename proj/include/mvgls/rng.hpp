#pragma once

#include <cmath>
#include <cstdint>

namespace mvgls {

/// splitmix64 stream. One independent stream per (seed, replication, purpose)
/// triple, derived by hashing, so parallel workers never need coordination.
class RngStream {
public:
    explicit RngStream(std::uint64_t state) : state_(state) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static RngStream derive(std::uint64_t seed, std::uint64_t rep, std::uint64_t purpose) {
        std::uint64_t h = mix(seed + 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ (rep + 0xd1b54a32d192ed03ULL));
        h = mix(h ^ (purpose + 0x8cb92ba72f3d8dd7ULL));
        return RngStream(h);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        return mix(z);
    }

    /// Uniform in [0, 1).
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via Box-Muller; the second value of each pair is cached.
    double next_gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace mvgls
