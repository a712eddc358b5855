#pragma once

#include <cmath>
#include <cstdint>

namespace ldtail {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// PCG32 keyed by an explicit (seed, stream) pair.  Substream derivation is
/// O(1), so worker blocks can be assigned in any order and reduced in a fixed
/// one; results are then independent of the thread count.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) noexcept {
        std::uint64_t mix = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        const std::uint64_t initstate = detail::splitmix64(mix);
        inc_ = (stream << 1u) | 1u;
        state_ = 0u;
        next_u32();
        state_ += initstate;
        next_u32();
    }

    std::uint32_t next_u32() noexcept {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        const std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (two uniforms per draw, no caching).
    double normal() noexcept {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Standard exponential.
    double exponential() noexcept {
        return -std::log1p(-uniform01());
    }

    /// Poisson draw: product method below mean 10, Hoermann's PTRS transformed
    /// rejection above.  Exact for all means, O(1) expected cost for large ones.
    std::int64_t poisson(double mean) noexcept {
        if (mean <= 0.0) return 0;
        if (mean < 10.0) {
            const double limit = std::exp(-mean);
            std::int64_t k = 0;
            double prod = uniform01();
            while (prod > limit) {
                ++k;
                prod *= uniform01();
            }
            return k;
        }
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform01() - 0.5;
            double v = uniform01();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                kf * loglam - mean - std::lgamma(kf + 1.0)) {
                return static_cast<std::int64_t>(kf);
            }
        }
    }

private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 1;
};

}  // namespace ldtail
