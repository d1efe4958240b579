#pragma once

#include <cmath>
#include <cstdint>

namespace effc {

/// Splittable 64-bit generator (SplitMix64, Steele/Lea/Flood; Vigna's
/// fixed-increment variant). A (seed, stream) pair deterministically selects
/// an independent stream, so Monte Carlo replicas can be distributed and
/// merged reproducibly.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed + GAMMA * (stream + 1)) ^ mix(stream + 0x632be59bd9b4e019ull)) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += GAMMA);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0,1).
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential with the given rate via inverse CDF; strictly positive.
    double exponential(double rate) {
        return -std::log(uniform01()) / rate;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift rejection sampler.
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        std::uint64_t l = static_cast<std::uint64_t>(m);
        if (l < n) {
            std::uint64_t t = -n % n;
            while (l < t) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                l = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    static constexpr std::uint64_t GAMMA = 0x9e3779b97f4a7c15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdull;
        z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ull;
        return z ^ (z >> 33);
    }

    std::uint64_t state_;
};

/// Error-free-transformation (Kahan) accumulator. Descents from 10^6 blocks
/// sum ~10^6 tiny exponentials; naive accumulation loses the 2/(c j) signal
/// near the ceiling.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace effc
