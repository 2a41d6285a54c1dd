#pragma once

#include "qndi/fock.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace qndi::test {

inline constexpr double kPi = std::numbers::pi;

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20260117);
    return gen;
}

inline double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline FockVector random_vector(int n_max) {
    std::vector<Complex> amps(static_cast<std::size_t>(n_max) + 1);
    for (auto& a : amps)
        a = {uniform(-1, 1), uniform(-1, 1)};
    return FockVector(std::move(amps));
}

inline double max_abs_diff(const FockVector& a, const FockVector& b) {
    double m = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
        m = std::max(m, std::abs(a[n] - b[n]));
    return m;
}

} // namespace qndi::test
