#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace cran {

/// splitmix64 step; used to derive well-separated sub-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a base seed with stream tags (drop index, step, BS id, ...) so that
/// every Monte-Carlo sub-stream is independent and reproducible.
inline std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(base);
    for (std::uint64_t t : tags) s = splitmix64(s ^ t);
    return s;
}

/// Seeded random stream with explicit transforms. The engine sequence is
/// fully specified by the standard and the transforms below are written out,
/// so a (seed, call sequence) pair reproduces bit-identical values anywhere.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    std::complex<double> cgauss() {
        const double re = gauss();
        const double im = gauss();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    /// Uniform point in the disc of radius `radius` around (cx, cy).
    std::pair<double, double> in_disc(double cx, double cy, double radius) {
        const double r = radius * std::sqrt(uniform());
        const double a = 2.0 * std::numbers::pi * uniform();
        return {cx + r * std::cos(a), cy + r * std::sin(a)};
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free modulo is fine here; n is tiny compared to 2^64.
        return eng_() % n;
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cran
