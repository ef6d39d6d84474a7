#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lmforecast {

/// Deterministic random source used for weight initialization and synthetic data.
///
/// The generator is splitmix64 (Steele/Lea/Vigna; public-domain reference
/// implementation), chosen over the standard <random> engines because
/// std::uniform_real_distribution and std::normal_distribution are not
/// bit-portable across standard library implementations. The exact update and
/// the derived uniform/gaussian mappings are documented in the README so that
/// an independent reimplementation produces identical streams:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   output = z ^ (z >> 31)
///
/// Uniform doubles take the top 53 bits scaled by 2^-53; gaussians come from
/// Box-Muller on consecutive uniform pairs with the second variate cached.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    /// Standard normal deviate.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) {
            u1 = 0x1.0p-53; // avoid log(0); occurs once per 2^53 draws
        }
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi_v<double> * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lmforecast
