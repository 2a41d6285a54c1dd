#include "qndi/interferometer.hpp"

#include "qndi/analytic.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace qndi;
using namespace qndi::test;

namespace {

ArmConfig single(double chi_t, double theta = 0.0, double chi_s_t = 0.0, double chi_p_t = 0.0) {
    ArmConfig c;
    c.cell_arm3 = KerrCellSpec{chi_t, chi_s_t, chi_p_t};
    c.theta = theta;
    return c;
}

ArmConfig both(double chi_t, double ratio, double theta = 0.0, double chi_s_t = 0.0) {
    ArmConfig c = single(chi_t, theta, chi_s_t);
    c.cell_arm2 = KerrCellSpec{ratio * chi_t, ratio * chi_s_t, 0.0};
    return c;
}

// Port-4 count for arbitrary splitters, written out from the two-path sum
// t1 t2 |nu> - r1 r2 e^{-i phase} |nu'>.
double n4_unbalanced(double r1sq, double r2sq, double v, double phase) {
    const double t1 = std::sqrt(1 - r1sq), r1 = std::sqrt(r1sq);
    const double t2 = std::sqrt(1 - r2sq), r2 = std::sqrt(r2sq);
    return t1 * t1 * t2 * t2 + r1 * r1 * r2 * r2 - 2 * t1 * t2 * r1 * r2 * v * std::cos(phase);
}

} // namespace

TEST_CASE("beamsplitter action") {
    PathState in;
    in.branch[0] = FockVector(std::vector<Complex>{1.0});
    in.branch[1] = FockVector(std::vector<Complex>{0.0});
    const PathState once = bs_transform(in, 0.5);
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(once[Arm::two][0] - Complex(h, 0)) < 1e-15);
    CHECK(std::abs(once[Arm::three][0] - Complex(0, h)) < 1e-15);

    const PathState twice = bs_transform(once, 0.5);
    CHECK(std::norm(twice[Arm::two][0]) < 1e-30);
    CHECK(std::abs(std::norm(twice[Arm::three][0]) - 1.0) < 1e-15);

    const PathState identity = bs_transform(in, 0.0);
    CHECK(identity[Arm::two][0] == Complex(1.0, 0.0));

    // Matrix product check for two unequal splitters.
    for (double r1 : {0.1, 0.3, 0.7}) {
        for (double r2 : {0.2, 0.5, 0.9}) {
            const Matrix2 a = beamsplitter_matrix(r1), b = beamsplitter_matrix(r2);
            const Complex m00 = b.m00 * a.m00 + b.m01 * a.m10;
            const Complex m10 = b.m10 * a.m00 + b.m11 * a.m10;
            const PathState out = bs_transform(bs_transform(in, r1), r2);
            CHECK(std::abs(out[Arm::two][0] - m00) < 1e-15);
            CHECK(std::abs(out[Arm::three][0] - m10) < 1e-15);
        }
    }
    CHECK_THROWS_AS(beamsplitter_matrix(1.5), std::invalid_argument);
}

TEST_CASE("kerr_evolve") {
    const ProbeSpec probe = make_probe({1.1, 0.4});
    const PathState split = bs_transform(inject(probe), 0.5);

    const PathState idle = kerr_evolve(split, Arm::three, {});
    CHECK(max_abs_diff(idle[Arm::two], split[Arm::two]) == 0.0);
    CHECK(max_abs_diff(idle[Arm::three], split[Arm::three]) == 0.0);

    // Photon in arm 3 rotates the probe on that branch only.
    const double chi = 0.37;
    const PathState tagged = kerr_evolve(split, Arm::three, {chi, 0.0, 0.0});
    const FockVector nu = coherent_state(probe.nu, probe.n_max);
    const FockVector nu_p = coherent_state(probe.nu * std::polar(1.0, -2 * chi), probe.n_max);
    const double h = 1.0 / std::sqrt(2.0);
    FockVector expect2 = nu;
    expect2 *= h;
    FockVector expect3 = nu_p;
    expect3 *= Complex(0, h);
    CHECK(max_abs_diff(tagged[Arm::two], expect2) < 1e-14);
    CHECK(max_abs_diff(tagged[Arm::three], expect3) < 1e-11);

    for (int trial = 0; trial < 20; ++trial) {
        const KerrCellSpec cell{uniform(0, 1.5), uniform(-1, 1), uniform(-1, 1)};
        CHECK(std::abs(kerr_evolve(split, Arm::three, cell).squared_norm() - split.squared_norm()) < 1e-12);
    }
}

TEST_CASE("single-cell reference points") {
    const ProbeSpec vac = make_probe(0.0);
    CHECK(run_single_cell(single(0.3, kPi), vac).n4_expectation == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(run_single_cell(single(0.3, 0.0), vac).n4_expectation) < 1e-15);

    const SimResult r = run_single_cell(single(0.4), make_probe(2.0));
    CHECK(std::abs(std::abs(r.probe_conditional_overlap) - std::exp(-8 * std::pow(std::sin(0.4), 2))) < 1e-10);

    // Large probe, chi T = pi/2: V = e^{-32}, fringe is flat.
    const ProbeSpec big = make_probe(4.0);
    for (double theta : {0.0, 1.0, kPi})
        CHECK(std::abs(run_single_cell(single(kPi / 2, theta), big).n4_expectation - 0.5) < 1e-12);
}

TEST_CASE("single cell matches the closed form including self-Kerr terms") {
    for (int trial = 0; trial < 60; ++trial) {
        const Complex nu{uniform(-2, 2), uniform(-2, 2)};
        const ArmConfig c = single(uniform(0, 1.5), uniform(0, 2 * kPi), uniform(-2, 2), uniform(-1, 1));
        const SimResult r = run_single_cell(c, make_probe(nu));
        const double closed = n4_single_cell({nu, *c.cell_arm3, c.theta, equivalent_phi0(c)});
        CHECK(std::abs(r.n4_expectation - closed) < 1e-10);
        CHECK(std::abs(r.n4_expectation + r.n5_expectation - 1.0) < 1e-12);
    }
}

TEST_CASE("unbalanced splitters against the two-path formula") {
    for (int trial = 0; trial < 40; ++trial) {
        const Complex nu = uniform(0, 2);
        ArmConfig c = single(uniform(0, 1.5), uniform(0, 2 * kPi));
        c.bs1_reflectivity = uniform(0.05, 0.95);
        c.bs2_reflectivity = uniform(0.05, 0.95);
        const SimResult r = run_single_cell(c, make_probe(nu));
        const KerrCellSpec cell = *c.cell_arm3;
        const double expect = n4_unbalanced(c.bs1_reflectivity, c.bs2_reflectivity, visibility(nu, cell),
                                            c.theta + probe_phase_shift(nu, cell));
        CHECK(std::abs(r.n4_expectation - expect) < 1e-10);
        CHECK(std::abs(r.joint_state_norm - 1.0) < 1e-12);
    }
}

TEST_CASE("double cell") {
    SUBCASE("equal interaction times erase the tag") {
        for (double a : {0.5, 2.0, 4.0}) {
            for (double theta : {0.3, 2.0, 4.4}) {
                const SimResult r = run_double_cell(both(0.9, 1.0, theta, 0.4), make_probe(a));
                CHECK(std::abs(r.n4_expectation - 0.5 * (1 - std::cos(theta))) < 1e-10);
            }
        }
    }
    SUBCASE("zero T' reduces to the single cell") {
        ArmConfig c = both(0.6, 0.0, 1.2);
        const double n4 = run_double_cell(c, make_probe(1.5)).n4_expectation;
        CHECK(std::abs(n4 - run_single_cell(single(0.6, 1.2), make_probe(1.5)).n4_expectation) < 1e-13);
    }
    SUBCASE("T' = T/2 against the halved-phase closed form") {
        const ArmConfig c = both(0.8, 0.5, 0.7, 0.6);
        const double n4 = run_double_cell(c, make_probe(1.7)).n4_expectation;
        const FringeParams p{1.7, *c.cell_arm3, 0.7, 0.3};
        CHECK(std::abs(n4 - n4_double_cell(p, 0.5)) < 1e-10);
    }
    SUBCASE("uniform inter-cell phase gives 1/2") {
        const SimResult r = run_double_cell(both(0.8, 1.0, 0.7), make_probe(1.0), PhaseDistribution::uniform());
        CHECK(std::abs(r.n4_expectation - 0.5) < 1e-12);
    }
    SUBCASE("cell placement errors") {
        CHECK_THROWS_AS(run_double_cell(single(0.3), make_probe(1.0)), std::invalid_argument);
        CHECK_THROWS_AS(run_single_cell(both(0.3, 1.0), make_probe(1.0)), std::invalid_argument);
        ArmConfig none;
        CHECK_THROWS_AS(run_single_cell(none, make_probe(1.0)), std::invalid_argument);
    }
}

TEST_CASE("fringe extraction") {
    const auto grid = theta_grid(720);
    CHECK(grid.size() == 720);
    CHECK(grid[0] == 0.0);
    CHECK(grid[360] == doctest::Approx(kPi).epsilon(1e-15));

    const auto vac = fringe_scan(single(0.3), make_probe(0.0), grid);
    CHECK(std::abs(extract_fringe(vac).visibility - 1.0) < 1e-10);

    std::vector<FringePoint> flat;
    for (double t : grid)
        flat.push_back({t, 0.5});
    CHECK(std::abs(extract_fringe(flat).visibility) < 1e-15);

    const Complex nu = 2.0;
    const ArmConfig c = single(0.4);
    const FringeFit fit = extract_fringe(fringe_scan(c, make_probe(nu), grid));
    CHECK(std::abs(fit.visibility - visibility(nu, *c.cell_arm3)) < 1e-10);
    CHECK(fit.max_residual < 1e-12);
    const double shift = std::remainder(probe_phase_shift(nu, *c.cell_arm3), 2 * kPi);
    CHECK(std::abs(std::remainder(fit.phase_offset - shift, 2 * kPi)) < 1e-10);
    // Raw contrast on a finite grid is within a grid step of the fitted value.
    CHECK(fit.raw_contrast <= fit.visibility + 1e-12);
    CHECK(fit.raw_contrast > fit.visibility - 1e-4);

    CHECK_THROWS_AS(fringe_scan(c, make_probe(nu), std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(extract_fringe(std::vector<FringePoint>{{0, 1}, {1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(extract_fringe(std::vector<FringePoint>{{0, 1}, {0, 1}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("property: fringe periodicity and unitarity") {
    for (int trial = 0; trial < 30; ++trial) {
        const ArmConfig c = single(uniform(0, 1.5), 0.0, uniform(-1, 1), uniform(-0.5, 0.5));
        const ProbeSpec p = make_probe({uniform(-2, 2), uniform(-2, 2)});
        const double theta = uniform(0, 2 * kPi);
        const std::vector<double> pts{theta, theta + 2 * kPi};
        const auto f = fringe_scan(c, p, pts);
        CHECK(std::abs(f[0].n4 - f[1].n4) < 1e-12);

        const PathState pre = evolve_to_recombination(c, p);
        CHECK(std::abs(pre.squared_norm() - 1.0) < 1e-12);
        CHECK(std::abs(bs_transform(pre, 0.5).squared_norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("simulated distinguishability saturates duality") {
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
        for (double chi : {0.0, 0.3, 0.8, 1.5}) {
            const ArmConfig c = single(chi);
            const ProbeSpec p = make_probe(a);
            const double d = simulated_distinguishability(c, p);
            const double v = std::abs(run_single_cell(c, p).probe_conditional_overlap);
            CHECK(std::abs(d * d + v * v - 1.0) < 1e-10);
            // Compare squares: sqrt amplifies rounding near D = 0.
            const double dc = distinguishability(a, *c.cell_arm3);
            CHECK(std::abs(d * d - dc * dc) < 1e-12);
        }
    }
}

TEST_CASE("ArmConfig validation") {
    ArmConfig c = single(0.1);
    c.bs1_reflectivity = 0.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c.bs1_reflectivity = 0.5;
    c.theta = std::nan("");
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c.theta = 0.0;
    CHECK_NOTHROW(validate(c));
    CHECK_THROWS_AS(run_single_cell(c, ProbeSpec{4.0, 10}), TruncationError);
}
