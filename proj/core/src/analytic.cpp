#include "qndi/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace qndi {

void validate(const KerrCellSpec& cell) {
    if (!std::isfinite(cell.chi_t) || !std::isfinite(cell.chi_s_t) || !std::isfinite(cell.chi_p_t))
        throw std::invalid_argument("Kerr cell phases must be finite");
}

double visibility(Complex nu, const KerrCellSpec& cell) {
    const double s = std::sin(cell.chi_t);
    return std::exp(-2.0 * std::norm(nu) * s * s);
}

double homodyne_snr(Complex nu, const KerrCellSpec& cell) {
    return 4.0 * std::abs(nu) * std::sin(cell.chi_t);
}

double distinguishability(Complex nu, const KerrCellSpec& cell) {
    const double v = visibility(nu, cell);
    return std::sqrt(std::max(0.0, 1.0 - v * v));
}

double probe_phase_shift(Complex nu, const KerrCellSpec& cell) {
    return std::norm(nu) * std::sin(2.0 * cell.chi_t);
}

double n4_single_cell(const FringeParams& p) {
    const double v = visibility(p.nu, p.cell);
    return 0.5 * (1.0 - v * std::cos(p.phi0 + p.theta + probe_phase_shift(p.nu, p.cell)));
}

double n4_double_cell(const FringeParams& p, double t_prime_ratio) {
    if (!(t_prime_ratio >= 0.0) || !std::isfinite(t_prime_ratio))
        throw std::invalid_argument("t_prime_ratio must be finite and >= 0");
    const double scale = 1.0 - t_prime_ratio;
    FringeParams eff = p;
    eff.cell.chi_t *= scale;
    eff.cell.chi_s_t *= scale;
    eff.phi0 *= scale;
    return n4_single_cell(eff);
}

double phi_factor(Complex nu, const KerrCellSpec& cell, double phi_extra) {
    return visibility(nu, cell) * std::cos(probe_phase_shift(nu, cell) + phi_extra);
}

} // namespace qndi
