#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace istn {

/// Derives an independent substream seed from a master seed and a stream tag.
/// splitmix64 finalizer; stable across platforms.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded generator with explicit inverse-CDF transforms. The standard
/// distribution objects are not bit-stable across library implementations,
/// so every draw here goes through mt19937_64 plus a fixed transform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    /// Pareto(a, x_m) via inverse CDF.
    double pareto(double a, double x_m) {
        return x_m * std::pow(1.0 - uniform(), -1.0 / a);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace istn
