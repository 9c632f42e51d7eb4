#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace fk_test {

/// Deterministic generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed = 20240611) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace fk_test
