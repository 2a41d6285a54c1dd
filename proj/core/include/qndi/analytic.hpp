#pragma once

// Closed-form fringe, visibility and which-path quantities for a single
// signal photon probed by a coherent field through a cross-Kerr cell.

#include "qndi/fock.hpp"

namespace qndi {

/// Dimensionless interaction phases of one Kerr cell.
struct KerrCellSpec {
    double chi_t = 0.0;   ///< cross-Kerr phase chi*T
    double chi_s_t = 0.0; ///< signal self-Kerr chi_s*T
    double chi_p_t = 0.0; ///< probe self-Kerr chi_p*T
};

void validate(const KerrCellSpec& cell);

struct FringeParams {
    Complex nu;
    KerrCellSpec cell;
    double theta = 0.0; ///< interferometer phase between arms
    double phi0 = 0.0;  ///< all deterministic signal phases lumped together
};

/// exp(-2|nu|^2 sin^2(chi T)).
double visibility(Complex nu, const KerrCellSpec& cell);

/// Homodyne signal-to-noise ratio 4|nu| sin(chi T).
double homodyne_snr(Complex nu, const KerrCellSpec& cell);

/// sqrt(1 - V^2): which-path distinguishability for a pure probe state.
double distinguishability(Complex nu, const KerrCellSpec& cell);

/// Probe-induced fringe shift |nu|^2 sin(2 chi T).
double probe_phase_shift(Complex nu, const KerrCellSpec& cell);

/// <n4> with one Kerr cell on arm 3:
/// 1/2 [1 - V cos(phi0 + theta + |nu|^2 sin(2 chi T))].
double n4_single_cell(const FringeParams& params);

/// <n4> with a second cell of interaction time T' = ratio * T on arm 2.
///
/// Every phase that scales with the interaction time enters through T - T',
/// so this is n4_single_cell with chi_t, chi_s_t and phi0 multiplied by
/// (1 - ratio). At ratio = 1 it is exactly 1/2 (1 - cos theta).
double n4_double_cell(const FringeParams& params, double t_prime_ratio);

/// Interference attenuation of the joint polarization probability:
/// V cos(|nu|^2 sin(2 chi T) + phi_extra).
double phi_factor(Complex nu, const KerrCellSpec& cell, double phi_extra);

} // namespace qndi
