#include "qndi/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qndi {
namespace {

constexpr Complex kI{0.0, 1.0};

void check_reflectivity(double r, const char* name) {
    if (!(r > 0.0 && r < 1.0))
        throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
}

// BS II and photon counting for a state evolved with theta = 0 and no
// inter-cell phase; returns (n4, n5).
std::pair<double, double> detect(const PathState& pre, double theta, double inter_cell_phase,
                                 double bs2_reflectivity) {
    // Same as phase_shift twice and bs_transform, without the temporaries.
    const Matrix2 m = beamsplitter_matrix(bs2_reflectivity);
    const Complex p2 = std::polar(1.0, -inter_cell_phase);
    const Complex p3 = std::polar(1.0, -theta);
    const Complex a00 = m.m00 * p2, a01 = m.m01 * p3, a10 = m.m10 * p2, a11 = m.m11 * p3;
    const FockVector& u = pre[Arm::two];
    const FockVector& v = pre[Arm::three];
    double n4 = 0.0, n5 = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        n4 += std::norm(a00 * u[n] + a01 * v[n]);
        n5 += std::norm(a10 * u[n] + a11 * v[n]);
    }
    return {n4, n5};
}

PathState evolve_unshifted(const ArmConfig& config, const ProbeSpec& probe) {
    ArmConfig unshifted = config;
    unshifted.theta = 0.0;
    return evolve_to_recombination(unshifted, probe);
}

SimResult simulate(const ArmConfig& config, const ProbeSpec& probe,
                   const PhaseDistribution& dist, int order) {
    const PathState pre = evolve_unshifted(config, probe);
    SimResult result;
    for (const auto& node : dist.nodes(order)) {
        const auto [n4, n5] = detect(pre, config.theta, node.phase, config.bs2_reflectivity);
        result.n4_expectation += node.weight * n4;
        result.n5_expectation += node.weight * n5;
    }
    result.joint_state_norm = result.n4_expectation + result.n5_expectation;

    const double w2 = pre[Arm::two].squared_norm();
    const double w3 = pre[Arm::three].squared_norm();
    result.probe_conditional_overlap =
        overlap(pre[Arm::two], pre[Arm::three]) / std::sqrt(w2 * w3);
    return result;
}

} // namespace

ProbeSpec make_probe(Complex nu) { return {nu, truncation_bound(nu)}; }

void validate(const ArmConfig& config) {
    check_reflectivity(config.bs1_reflectivity, "bs1_reflectivity");
    check_reflectivity(config.bs2_reflectivity, "bs2_reflectivity");
    if (!std::isfinite(config.theta))
        throw std::invalid_argument("theta must be finite");
    if (config.cell_arm2)
        validate(*config.cell_arm2);
    if (config.cell_arm3)
        validate(*config.cell_arm3);
}

PathState inject(const ProbeSpec& probe) {
    PathState s;
    s.branch[0] = coherent_state(probe.nu, probe.n_max, probe.tolerance);
    s.branch[1] = FockVector(probe.n_max);
    return s;
}

Matrix2 beamsplitter_matrix(double reflectivity) {
    if (!(reflectivity >= 0.0 && reflectivity <= 1.0))
        throw std::invalid_argument("reflectivity must lie in [0, 1]");
    const double t = std::sqrt(1.0 - reflectivity);
    const Complex ir = kI * std::sqrt(reflectivity);
    return {t, ir, ir, t};
}

PathState bs_transform(const PathState& state, double reflectivity) {
    const Matrix2 m = beamsplitter_matrix(reflectivity);
    PathState out;
    out.branch[0] = m.m00 * state.branch[0] + m.m01 * state.branch[1];
    out.branch[1] = m.m10 * state.branch[0] + m.m11 * state.branch[1];
    return out;
}

QuantumState bs_transform(const QuantumState& state, std::size_t path_register,
                          double reflectivity) {
    return state.apply_register_operator(path_register, beamsplitter_matrix(reflectivity));
}

PathState phase_shift(const PathState& state, Arm arm, double phase) {
    PathState out = state;
    out[arm] *= std::polar(1.0, -phase);
    return out;
}

double signal_self_phase(const KerrCellSpec& cell) { return 0.5 * cell.chi_s_t; }

PathState kerr_evolve(const PathState& state, Arm arm, const KerrCellSpec& cell) {
    if (arm != Arm::two && arm != Arm::three)
        throw std::invalid_argument("Kerr cell must sit on arm 2 or arm 3");
    validate(cell);
    PathState out = state;
    out[arm] = std::polar(1.0, -signal_self_phase(cell)) *
               number_phase_apply(out[arm], 2.0 * cell.chi_t);
    if (cell.chi_p_t != 0.0) {
        for (auto& b : out.branch)
            b = quadratic_phase_apply(b, cell.chi_p_t);
    }
    return out;
}

QuantumState kerr_evolve(const QuantumState& state, std::size_t reg, int outcome,
                         const KerrCellSpec& cell) {
    validate(cell);
    QuantumState out = state.apply_conditional_number_phase(reg, outcome, 2.0 * cell.chi_t)
                           .apply_conditional_phase(reg, outcome,
                                                    std::polar(1.0, -signal_self_phase(cell)));
    if (cell.chi_p_t != 0.0) {
        for (std::size_t b = 0; b < out.branch_count(); ++b)
            out.set_probe_branch(b, quadratic_phase_apply(out.probe_branch(b), cell.chi_p_t));
    }
    return out;
}

double equivalent_phi0(const ArmConfig& config) {
    const double arm3 = config.cell_arm3 ? signal_self_phase(*config.cell_arm3) : 0.0;
    const double arm2 = config.cell_arm2 ? signal_self_phase(*config.cell_arm2) : 0.0;
    return arm3 - arm2;
}

PathState evolve_to_recombination(const ArmConfig& config, const ProbeSpec& probe,
                                  double inter_cell_phase) {
    validate(config);
    PathState s = bs_transform(inject(probe), config.bs1_reflectivity);
    if (config.cell_arm3)
        s = kerr_evolve(s, Arm::three, *config.cell_arm3);
    if (config.cell_arm2)
        s = kerr_evolve(s, Arm::two, *config.cell_arm2);
    if (inter_cell_phase != 0.0)
        s = phase_shift(s, Arm::two, inter_cell_phase);
    return phase_shift(s, Arm::three, config.theta);
}

SimResult run_single_cell(const ArmConfig& config, const ProbeSpec& probe) {
    if (!config.cell_arm3 || config.cell_arm2)
        throw std::invalid_argument("single-cell run needs a cell on arm 3 only");
    return simulate(config, probe, PhaseDistribution::none(), 1);
}

SimResult run_double_cell(const ArmConfig& config, const ProbeSpec& probe,
                          const PhaseDistribution& inter_cell_phase, int quadrature_order) {
    if (!config.cell_arm3 || !config.cell_arm2)
        throw std::invalid_argument("double-cell run needs cells on both arms");
    return simulate(config, probe, inter_cell_phase, quadrature_order);
}

std::vector<FringePoint> fringe_scan(const ArmConfig& config, const ProbeSpec& probe,
                                     std::span<const double> grid,
                                     const PhaseDistribution& inter_cell_phase) {
    if (grid.empty())
        throw std::invalid_argument("fringe scan needs a nonempty theta grid");
    const auto nodes = inter_cell_phase.nodes();
    const PathState pre = evolve_unshifted(config, probe);
    std::vector<FringePoint> out;
    out.reserve(grid.size());
    for (double theta : grid) {
        double n4 = 0.0;
        for (const auto& node : nodes)
            n4 += node.weight * detect(pre, theta, node.phase, config.bs2_reflectivity).first;
        out.push_back({theta, n4});
    }
    return out;
}

std::vector<double> theta_grid(std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k)
        grid[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    return grid;
}

FringeFit extract_fringe(std::span<const FringePoint> samples) {
    if (samples.size() < 3)
        throw std::invalid_argument("fringe fit needs at least three samples");

    // Normal equations for n4 ~ c0 + A cos(theta) + B sin(theta).
    double g[3][3] = {};
    double r[3] = {};
    for (const auto& p : samples) {
        const double f[3] = {1.0, std::cos(p.theta), std::sin(p.theta)};
        for (int i = 0; i < 3; ++i) {
            r[i] += f[i] * p.n4;
            for (int j = 0; j < 3; ++j)
                g[i][j] += f[i] * f[j];
        }
    }
    const auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double det = det3(g);
    if (std::abs(det) < 1e-12 * static_cast<double>(samples.size() * samples.size() * samples.size()))
        throw std::invalid_argument("fringe samples do not span three independent phases");
    double coef[3];
    for (int k = 0; k < 3; ++k) {
        double m[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m[i][j] = (j == k) ? r[i] : g[i][j];
        coef[k] = det3(m) / det;
    }

    FringeFit fit;
    fit.mean = coef[0];
    fit.amplitude = std::hypot(coef[1], coef[2]);
    fit.visibility = fit.mean != 0.0 ? fit.amplitude / fit.mean : 0.0;
    fit.phase_offset = fit.amplitude > 0.0 ? std::atan2(coef[2], -coef[1]) : 0.0;

    const auto [lo, hi] = std::minmax_element(
        samples.begin(), samples.end(),
        [](const FringePoint& a, const FringePoint& b) { return a.n4 < b.n4; });
    const double sum = hi->n4 + lo->n4;
    fit.raw_contrast = sum != 0.0 ? (hi->n4 - lo->n4) / sum : 0.0;
    fit.argmax_theta = hi->theta;
    for (const auto& p : samples) {
        const double model = coef[0] + coef[1] * std::cos(p.theta) + coef[2] * std::sin(p.theta);
        fit.max_residual = std::max(fit.max_residual, std::abs(model - p.n4));
    }
    return fit;
}

double simulated_distinguishability(const ArmConfig& config, const ProbeSpec& probe) {
    const PathState pre = evolve_unshifted(config, probe);
    const FockVector& u = pre[Arm::two];
    const FockVector& v = pre[Arm::three];
    const double wu = u.squared_norm();
    const double wv = v.squared_norm();
    if (wu == 0.0 || wv == 0.0)
        return std::abs(wu - wv);

    // Restrict |u><u| - |v><v| to span{u, v}: u -> (|u|, 0), v -> (c, d).
    const double nu_len = std::sqrt(wu);
    const Complex c = overlap(u, v) / nu_len;
    const double d = std::sqrt(std::max(0.0, wv - std::norm(c)));
    const double m00 = wu - std::norm(c);
    const double m11 = -d * d;
    const double off = std::abs(c) * d;
    const double half_tr = 0.5 * (m00 + m11);
    const double disc = std::sqrt(0.25 * (m00 - m11) * (m00 - m11) + off * off);
    return std::abs(half_tr + disc) + std::abs(half_tr - disc);
}

} // namespace qndi
