#include "qndi/fock.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace qndi;
using namespace qndi::test;

namespace {

// Textbook amplitude with an explicit factorial; fine while n! fits a double.
Complex poisson_amplitude_direct(Complex nu, int n) {
    return std::exp(-0.5 * std::norm(nu)) * std::pow(nu, n) / std::sqrt(std::tgamma(n + 1.0));
}

// Tail by explicit summation of the Poisson pmf.
double poisson_tail_direct(double mean, int n_max) {
    double tail = 0.0;
    for (int k = n_max + 1; k < n_max + 400; ++k)
        tail += std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
    return tail;
}

} // namespace

TEST_CASE("coherent_state: vacuum") {
    const FockVector v = coherent_state(0.0, 4);
    REQUIRE(v.size() == 5);
    CHECK(v[0] == Complex(1.0, 0.0));
    for (int n = 1; n <= 4; ++n)
        CHECK(v[n] == Complex(0.0, 0.0));
}

TEST_CASE("coherent_state: matches direct Poissonian amplitudes") {
    const FockVector v = coherent_state(1.0, 30);
    CHECK(v[0].real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(v[1].real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(std::exp(-0.5) == doctest::Approx(0.60653).epsilon(1e-5));

    for (Complex nu : {Complex(1.0, 0.0), Complex(0.3, -1.2), Complex(0.0, 2.0), Complex(-2.5, 0.7)}) {
        const FockVector c = coherent_state(nu);
        for (int n = 0; n <= std::min(c.n_max(), 150); ++n)
            CHECK(std::abs(c[n] - poisson_amplitude_direct(nu, n)) < 1e-13);
    }
}

TEST_CASE("coherent_state: squared norm of truncated state") {
    CHECK(std::abs(coherent_state({0.0, 2.0}, 60).squared_norm() - 1.0) < 1e-12);
    // Cutoff beyond n = 171, where a direct factorial would overflow.
    const FockVector big = coherent_state(12.0);
    CHECK(big.n_max() > 171);
    CHECK(std::abs(big.squared_norm() - 1.0) < 1e-12);
    for (std::size_t n = 0; n < big.size(); ++n)
        CHECK(std::isfinite(std::abs(big[n])));
}

TEST_CASE("coherent_state: rejects bad cutoffs") {
    CHECK_THROWS_AS(coherent_state(1.0, -1), std::invalid_argument);
    CHECK_THROWS_AS(coherent_state(4.0, 30), TruncationError);
    CHECK_NOTHROW(coherent_state(4.0, 30, 0.5));
}

TEST_CASE("poisson_tail agrees with explicit summation") {
    for (auto [mean, n_max] : {std::pair{4.0, 10}, {16.0, 30}, {1.0, 5}, {9.0, 40}}) {
        const double direct = poisson_tail_direct(mean, n_max);
        CHECK(poisson_tail(mean, n_max) == doctest::Approx(direct).epsilon(1e-9));
    }
    CHECK(poisson_tail(0.0, 0) == 0.0);
}

TEST_CASE("truncation rule keeps the tail below 1e-12 up to |nu| = 4") {
    CHECK_NOTHROW(verify_truncation_rule(4.0, 1e-12));
    for (double a : {0.0, 0.5, 1.0, 2.0, 3.0, 4.0})
        CHECK(poisson_tail(a * a, truncation_bound(a)) < 1e-12);
    CHECK(truncation_bound(0.0) == 20);
    CHECK(truncation_bound(2.0) == 44);
}

TEST_CASE("number_phase_apply") {
    const FockVector v = random_vector(12);
    CHECK(max_abs_diff(number_phase_apply(v, 0.0), v) == 0.0);
    CHECK(max_abs_diff(number_phase_apply(v, 2.0 * kPi), v) < 1e-12);
    CHECK(number_phase_apply(v, 0.731).squared_norm() == doctest::Approx(v.squared_norm()).epsilon(1e-14));

    // Coherent rotation identity.
    for (int trial = 0; trial < 50; ++trial) {
        const Complex nu{uniform(-2, 2), uniform(-2, 2)};
        const double chi_t = uniform(0.0, 1.5);
        const int n_max = truncation_bound(nu);
        const FockVector rotated = number_phase_apply(coherent_state(nu, n_max), 2.0 * chi_t);
        const FockVector direct = coherent_state(nu * std::polar(1.0, -2.0 * chi_t), n_max);
        CHECK(max_abs_diff(rotated, direct) < 10 * kDefaultTruncationTolerance);
    }
}

TEST_CASE("overlap: closed-form envelope and phase") {
    const FockVector nu1 = coherent_state(1.3);
    CHECK(std::abs(overlap(nu1, nu1) - 1.0) < 1e-12);

    for (double a : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        for (double chi_t : {0.05, 0.1, 0.25, 0.4, 0.5}) {
            const Complex nu = std::polar(a, 0.3);
            const int n_max = truncation_bound(nu);
            const FockVector v = coherent_state(nu, n_max);
            const FockVector vp = coherent_state(nu * std::polar(1.0, -2.0 * chi_t), n_max);
            const Complex ov = overlap(v, vp);
            const double s = std::sin(chi_t);
            CHECK(std::abs(std::abs(ov) - std::exp(-2.0 * a * a * s * s)) < 1e-10);
            CHECK(std::abs(std::remainder(std::arg(ov) + a * a * std::sin(2.0 * chi_t), 2.0 * kPi)) < 1e-10);
        }
    }
}

TEST_CASE("overlap: Hermitian symmetry and errors") {
    for (int trial = 0; trial < 20; ++trial) {
        const FockVector a = random_vector(9);
        const FockVector b = random_vector(9);
        CHECK(std::abs(overlap(a, b) - std::conj(overlap(b, a))) < 1e-14);
    }
    CHECK_THROWS_AS(overlap(FockVector(3), FockVector(4)), std::invalid_argument);
}

TEST_CASE("QuantumState: marginals") {
    const FockVector probe = coherent_state(0.7);

    SUBCASE("product state gives the factor's distribution") {
        const std::array<Complex, 2> path{std::sqrt(0.3), Complex(0.0, std::sqrt(0.7))};
        const QuantumState s = QuantumState::product({2}, path, probe);
        CHECK(s.marginal_probability(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(s.marginal_probability(0, 1) == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("equal superposition with vacuum probe") {
        const double h = 1.0 / std::sqrt(2.0);
        const std::array<Complex, 2> path{h, Complex(0.0, h)};
        const QuantumState s = QuantumState::product({2}, path, coherent_state(0.0, 3));
        CHECK(std::abs(s.marginal_probability(0, 0) - 0.5) < 1e-15);
        CHECK(std::abs(s.marginal_probability(0, 1) - 0.5) < 1e-15);
    }
    SUBCASE("outcomes sum to one") {
        const std::array<Complex, 6> amps{0.1, 0.5, Complex(0, 0.2), 0.3, 0.6, Complex(0.2, 0.3)};
        double norm = 0.0;
        for (auto a : amps)
            norm += std::norm(a);
        std::array<Complex, 6> unit;
        for (std::size_t i = 0; i < 6; ++i)
            unit[i] = amps[i] / std::sqrt(norm);
        const QuantumState s = QuantumState::product({2, 3}, unit, coherent_state(1.1));
        CHECK(std::abs(s.marginal_probability(1, 0) + s.marginal_probability(1, 1) +
                       s.marginal_probability(1, 2) - 1.0) < 1e-12);
    }
    SUBCASE("index errors") {
        const std::array<Complex, 2> path{1.0, 0.0};
        const QuantumState s = QuantumState::product({2}, path, probe);
        CHECK_THROWS_AS(s.marginal_probability(1, 0), std::out_of_range);
        CHECK_THROWS_AS(s.marginal_probability(0, 2), std::out_of_range);
        CHECK_THROWS_AS(s.marginal_probability(0, -1), std::out_of_range);
    }
}

TEST_CASE("QuantumState: register operator and contraction") {
    const double h = 1.0 / std::sqrt(2.0);
    const std::array<Complex, 4> amps{0.0, h, h, 0.0};
    const QuantumState s = QuantumState::product({2, 2}, amps, coherent_state(1.0));
    const Matrix2 hadamard{h, h, h, -h};
    const QuantumState t = s.apply_register_operator(1, hadamard);
    CHECK(std::abs(t.squared_norm() - s.squared_norm()) < 1e-14);

    // <H| on register 0 leaves (|V> ⊗ probe) / sqrt 2 on the remaining photon.
    const std::array<Complex, 2> bra_h{1.0, 0.0};
    const QuantumState reduced = s.contract(0, bra_h);
    REQUIRE(reduced.register_dims().size() == 1);
    CHECK(std::abs(reduced.marginal_probability(0, 1) - 0.5) < 1e-12);
    CHECK(reduced.marginal_probability(0, 0) == 0.0);
    CHECK(std::abs(reduced.squared_norm() - 0.5) < 1e-12);
}

TEST_CASE("QuantumState: phase-tagged branches keep polarization marginals") {
    // (|HV>|nu'> + |VH>|nu>)/sqrt 2 with nu' = nu has the same polarization
    // marginals as the untagged pair; brute-force over the 4-state basis.
    const double h = 1.0 / std::sqrt(2.0);
    const FockVector nu = coherent_state({0.8, 0.4});
    const std::array<Complex, 4> amps{0.0, h, h, 0.0};
    const QuantumState pair = QuantumState::product({2, 2}, amps, nu);
    const QuantumState tagged = pair.apply_conditional_number_phase(1, 1, 0.0);

    for (std::size_t reg : {0u, 1u}) {
        for (int out : {0, 1}) {
            double brute = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    if ((reg == 0 ? a : b) == out)
                        brute += std::norm(amps[static_cast<std::size_t>(2 * a + b)]);
            CHECK(std::abs(tagged.marginal_probability(reg, out) - brute * nu.squared_norm()) < 1e-12);
        }
    }
}
