#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "osmt/types.hpp"

namespace osmt {

// Deterministic random source. Value transforms are spelled out here
// (53-bit uniform, Box-Muller normal) instead of std::*_distribution, whose
// output is implementation-defined; the same seed must yield the same stream
// on any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi], inclusive. Rejection-free modulo is fine
    // here: ranges are tiny relative to 2^64, the bias is unobservable.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return lo + engine_() % (hi - lo + 1);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    double normal(double mean, double sigma) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sigma * spare_;
        }
        // Box-Muller; u1 in (0,1] so log is finite.
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + sigma * r * std::cos(theta);
    }

    Embedding gaussian_vector(int d, double sigma) {
        Embedding v(static_cast<std::size_t>(d));
        for (auto& x : v) x = normal(0.0, sigma);
        return v;
    }

    // Uniform direction on the unit sphere in R^d.
    Embedding unit_vector(int d) {
        Embedding v = gaussian_vector(d, 1.0);
        double norm2 = 0.0;
        for (double x : v) norm2 += x * x;
        double norm = std::sqrt(norm2);
        if (norm == 0.0) {
            v[0] = 1.0;
            return v;
        }
        for (auto& x : v) x /= norm;
        return v;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace osmt
