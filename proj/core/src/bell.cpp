#include "qndi/bell.hpp"

#include "qndi/interferometer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace qndi {
namespace {

constexpr double kPi = std::numbers::pi;

double canonical_angle(double theta) {
    double r = std::fmod(theta, kPi);
    if (r < 0.0)
        r += kPi;
    return r >= kPi ? 0.0 : r;
}

std::array<Complex, 2> polarizer_bra(double theta) { return {std::cos(theta), std::sin(theta)}; }

void check_phi(double phi) {
    if (!(phi >= -1.0 && phi <= 1.0))
        throw std::invalid_argument("phi must lie in [-1, 1]");
}

using AngleVec = std::array<double, 4>; // theta1, theta1', theta2, theta2'

PolarizerAngles to_angles(const AngleVec& x) { return {x[0], x[1], x[2], x[3]}; }

double chs_value(const AngleVec& x, double phi) { return chs_sum(to_angles(x), phi).chs; }

struct Candidate {
    double value;
    AngleVec angles;
};

// Coordinate ascent. With the other three angles fixed the sum is
// A + B cos(2t) + C sin(2t) in the remaining one, so each 1-D step is exact.
Candidate refine(AngleVec x, double phi, const ChsSearchOptions& opt, ChsSearchStats& stats) {
    double grad_norm = 0.0;
    int sweep = 0;
    for (; sweep < opt.max_sweeps; ++sweep) {
        double g2 = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            AngleVec y = x;
            y[k] = 0.0;
            const double f0 = chs_value(y, phi);
            y[k] = kPi / 4.0;
            const double fq = chs_value(y, phi);
            y[k] = kPi / 2.0;
            const double fh = chs_value(y, phi);
            const double a = 0.5 * (f0 + fh);
            const double b = 0.5 * (f0 - fh);
            const double c = fq - a;
            const double g = 2.0 * (-b * std::sin(2.0 * x[k]) + c * std::cos(2.0 * x[k]));
            g2 += g * g;
            if (b != 0.0 || c != 0.0)
                x[k] = canonical_angle(0.5 * std::atan2(c, b));
        }
        grad_norm = std::sqrt(g2);
        if (grad_norm < opt.stationarity)
            break;
    }
    stats.gradient_norm = std::max(stats.gradient_norm, grad_norm);
    stats.sweeps = std::max(stats.sweeps, sweep + 1);
    return {chs_value(x, phi), x};
}

bool better(const Candidate& a, const Candidate& b) {
    constexpr double tie = 1e-13;
    if (a.value > b.value + tie)
        return true;
    if (b.value > a.value + tie)
        return false;
    return a.angles < b.angles;
}

} // namespace

PolarizerAngles PolarizerAngles::canonical() const {
    return {canonical_angle(theta1), canonical_angle(theta1p), canonical_angle(theta2),
            canonical_angle(theta2p)};
}

QuantumState entangled_state(const FockVector& probe) {
    const double h = 1.0 / std::sqrt(2.0);
    // Row-major over (partner, interferometer photon): HH, HV, VH, VV.
    const std::array<Complex, 4> amps{0.0, h, h, 0.0};
    return QuantumState::product({2, 2}, amps, probe);
}

QuantumState tag_with_kerr(const QuantumState& state, const KerrCellSpec& cell, double phi_extra) {
    return kerr_evolve(state, kInterferometerPhoton, kVertical, cell)
        .apply_conditional_phase(kInterferometerPhoton, kVertical, std::polar(1.0, -phi_extra));
}

double joint_probability(double theta1, double theta2, double phi) {
    const double c1 = std::cos(theta1), s1 = std::sin(theta1);
    const double c2 = std::cos(theta2), s2 = std::sin(theta2);
    return 0.5 * (c1 * c1 * s2 * s2 + c2 * c2 * s1 * s1 + 2.0 * phi * c1 * s2 * c2 * s1);
}

double joint_probability(double theta1, double theta2, Complex nu, const KerrCellSpec& cell,
                         double phi_extra) {
    return joint_probability(theta1, theta2, phi_factor(nu, cell, phi_extra));
}

double joint_probability(const QuantumState& state, double theta1, double theta2) {
    if (state.register_dims().size() != 2)
        throw std::invalid_argument("joint probability needs a two-photon state");
    const auto bra1 = polarizer_bra(theta1);
    const auto bra2 = polarizer_bra(theta2);
    // Contracting the partner removes register 0, so the other photon moves to 0.
    return state.contract(kPartnerPhoton, bra1).contract(0, bra2).squared_norm();
}

double singles_probability(double) { return 0.5; }

double singles_probability(const QuantumState& state, std::size_t photon, double theta) {
    const auto bra = polarizer_bra(theta);
    return state.contract(photon, bra).squared_norm();
}

CHSReport chs_sum(const PolarizerAngles& angles, double phi) {
    CHSReport r;
    r.angles = angles;
    r.phi_used = phi;
    r.p11 = joint_probability(angles.theta1, angles.theta2, phi);
    r.p12p = joint_probability(angles.theta1, angles.theta2p, phi);
    r.p1p2 = joint_probability(angles.theta1p, angles.theta2, phi);
    r.p1p2p = joint_probability(angles.theta1p, angles.theta2p, phi);
    r.s1p = singles_probability(angles.theta1p);
    r.s2 = singles_probability(angles.theta2);
    r.chs = r.p11 - r.p12p + r.p1p2 + r.p1p2p - r.s1p - r.s2;
    return r;
}

CHSReport chs_sum(const QuantumState& state, const PolarizerAngles& angles) {
    CHSReport r;
    r.angles = angles;
    r.p11 = joint_probability(state, angles.theta1, angles.theta2);
    r.p12p = joint_probability(state, angles.theta1, angles.theta2p);
    r.p1p2 = joint_probability(state, angles.theta1p, angles.theta2);
    r.p1p2p = joint_probability(state, angles.theta1p, angles.theta2p);
    r.s1p = singles_probability(state, kPartnerPhoton, angles.theta1p);
    r.s2 = singles_probability(state, kInterferometerPhoton, angles.theta2);
    r.chs = r.p11 - r.p12p + r.p1p2 + r.p1p2p - r.s1p - r.s2;
    return r;
}

double chs_optimum(double phi) { return 0.5 * (std::sqrt(1.0 + phi * phi) - 1.0); }

PolarizerAngles fixed_reference_angles() { return {0.0, kPi / 4.0, 3.0 * kPi / 8.0, kPi / 8.0}; }

CHSReport maximize_chs(double phi, const ChsSearchOptions& opt, ChsSearchStats* stats_out) {
    check_phi(phi);
    if (opt.grid_points < 2)
        throw std::invalid_argument("grid_points must be >= 2");
    const int n = opt.grid_points;
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        grid[static_cast<std::size_t>(k)] = kPi * k / n;

    std::vector<double> joint(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            joint[static_cast<std::size_t>(i * n + j)] = joint_probability(grid[i], grid[j], phi);
    std::vector<double> single(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        single[static_cast<std::size_t>(k)] = singles_probability(grid[k]);

    // Exhaustive scan, one block per theta1 index. Within a block the first
    // strict maximum in lexicographic order wins.
    auto scan_block = [&](int i) {
        Candidate best{-std::numeric_limits<double>::infinity(), {}};
        const double* pi_row = &joint[static_cast<std::size_t>(i * n)];
        for (int ip = 0; ip < n; ++ip) {
            const double* pip_row = &joint[static_cast<std::size_t>(ip * n)];
            for (int j = 0; j < n; ++j) {
                for (int jp = 0; jp < n; ++jp) {
                    const double v = pi_row[j] - pi_row[jp] + pip_row[j] + pip_row[jp] -
                                     single[static_cast<std::size_t>(ip)] -
                                     single[static_cast<std::size_t>(j)];
                    if (v > best.value)
                        best = {v, {grid[i], grid[ip], grid[j], grid[jp]}};
                }
            }
        }
        return best;
    };

    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<Candidate> block_best(static_cast<std::size_t>(n));
    {
        std::vector<std::future<void>> jobs;
        for (unsigned t = 0; t < threads; ++t) {
            jobs.push_back(std::async(std::launch::async, [&, t] {
                for (int i = static_cast<int>(t); i < n; i += static_cast<int>(threads))
                    block_best[static_cast<std::size_t>(i)] = scan_block(i);
            }));
        }
        for (auto& j : jobs)
            j.get();
    }

    ChsSearchStats stats;
    stats.coarse_best = -std::numeric_limits<double>::infinity();
    for (const auto& c : block_best)
        stats.coarse_best = std::max(stats.coarse_best, c.value);

    // Refine only the blocks that come close to the coarse optimum.
    const double slack = 0.05;
    Candidate winner{-std::numeric_limits<double>::infinity(), {}};
    for (const auto& c : block_best) {
        if (c.value < stats.coarse_best - slack)
            continue;
        Candidate refined = refine(c.angles, phi, opt, stats);
        if (better(refined, winner))
            winner = refined;
    }
    if (stats_out)
        *stats_out = stats;
    return chs_sum(to_angles(winner.angles).canonical(), phi);
}

std::vector<CoherenceChsRow> chs_vs_coherence(double phi0, std::span<const double> gammas,
                                              const ChsSearchOptions& options) {
    check_phi(phi0);
    std::vector<CoherenceChsRow> rows;
    rows.reserve(gammas.size());
    for (double g : gammas) {
        if (!(g >= 0.0 && g <= 1.0))
            throw std::invalid_argument("gamma must lie in [0, 1]");
        CoherenceChsRow row;
        row.gamma = g;
        row.phi_effective = g * phi0;
        row.best = maximize_chs(row.phi_effective, options);
        row.fixed_angle_chs = chs_sum(fixed_reference_angles(), row.phi_effective).chs;
        rows.push_back(row);
    }
    return rows;
}

} // namespace qndi
