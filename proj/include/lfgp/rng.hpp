#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace lfgp {

/// Counter-style pseudo random generator built on the splitmix64 mixer.
///
/// Every draw advances an internal 64-bit counter through the splitmix64
/// finalizer, so streams can be forked cheaply and reproducibly: a fork keyed
/// by (seed, index) yields the same sequence on every platform. All
/// distributions below are implemented explicitly (no std::*_distribution) so
/// outputs do not depend on the standard library vendor.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    /// Deterministically derive an independent substream, e.g. per cluster or
    /// per data index.
    Rng stream(std::uint64_t key) const {
        Rng r(0);
        r.state_ = mix(state_ + 0xbf58476d1ce4e5b9ull * (key + 1));
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (both values computed, one kept, so the
    /// uniform consumption per call is fixed).
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 boosted via the
    /// Gamma(shape+1) * U^{1/shape} identity.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            double u = uniform01();
            while (u <= 0.0) u = uniform01();
            return g * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Beta(a, b) as the ratio of two Gamma variates.
    double beta(double a, double b) {
        const double ga = gamma(a);
        const double gb = gamma(b);
        return ga / (ga + gb);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

} // namespace lfgp
