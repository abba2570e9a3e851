#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fracdrift {

/// mt19937_64 with explicit conversions so streams are identical across
/// standard libraries (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double th = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(th);
        has_spare_ = true;
        return r * std::cos(th);
    }

    // Exponential with unit mean.
    double exponential() { return -std::log(uniform()); }

    // +1 or -1 with equal probability.
    double sign() { return (eng_() >> 63) ? 1.0 : -1.0; }

    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives independent stream seeds from a base seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace fracdrift
