#pragma once

// Deterministic random variate generation. All variates are derived from
// mt19937_64 output through fixed arithmetic rather than the standard
// <random> distributions, so that a given seed reproduces the same stream
// on every platform and standard-library version.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace clilm {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stream-seed split function: replicate k of a run with base seed s uses
// derive_seed(s, k). Distinct (s, k) pairs map to well-separated seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base + 0x9E3779B97F4A7C15ull * (index + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform on {0, ..., n-1}, rejection sampled to avoid modulo bias.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / span * span;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return static_cast<std::size_t>(v % span);
    }

    // Standard normal via Box-Muller (no state carried between calls).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double cauchy(double location, double scale) {
        return location + scale * std::tan(std::numbers::pi * (uniform() - 0.5));
    }

    // Poisson by CDF inversion; adequate for the small means used here.
    int poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson: mean must be >= 0");
        const double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        int k = 0;
        while (u > cdf && k < 1000000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace clilm
