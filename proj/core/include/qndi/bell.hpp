#pragma once

// Polarization-entangled variant: one photon of the pair is routed through
// the interferometer by a polarizing beamsplitter (H -> arm 2, V -> arm 3),
// tagged by the Kerr cell on arm 3, and both photons are detected behind
// linear polarizers. The Clauser-Horne sum quantifies what survives of the
// nonlocal correlation.

#include "qndi/analytic.hpp"
#include "qndi/fock.hpp"

#include <span>
#include <vector>

namespace qndi {

/// Register layout of the Bell states below.
inline constexpr std::size_t kPartnerPhoton = 0;       ///< detected at D3
inline constexpr std::size_t kInterferometerPhoton = 1; ///< routed by the PBS
inline constexpr int kHorizontal = 0;
inline constexpr int kVertical = 1;

struct PolarizerAngles {
    double theta1 = 0.0;  ///< partner photon, first setting
    double theta1p = 0.0; ///< partner photon, second setting
    double theta2 = 0.0;  ///< interferometer photon, first setting
    double theta2p = 0.0; ///< interferometer photon, second setting

    /// Each angle reduced to [0, pi); polarizer outcomes have period pi.
    PolarizerAngles canonical() const;
};

struct CHSReport {
    double p11 = 0.0;   ///< P(theta1, theta2)
    double p12p = 0.0;  ///< P(theta1, theta2')
    double p1p2 = 0.0;  ///< P(theta1', theta2)
    double p1p2p = 0.0; ///< P(theta1', theta2')
    double s1p = 0.0;   ///< P(theta1')
    double s2 = 0.0;    ///< P(theta2)
    double chs = 0.0;
    double phi_used = 0.0;
    PolarizerAngles angles;
};

/// (|H>|V> + |V>|H>) / sqrt(2) on the two polarization registers, probe in
/// `probe`.
QuantumState entangled_state(const FockVector& probe);

/// PBS routing plus the arm-3 Kerr cell: the branch where the interferometer
/// photon is V acquires the cell's phases and an extra exp(-i phi_extra).
QuantumState tag_with_kerr(const QuantumState& state, const KerrCellSpec& cell,
                           double phi_extra = 0.0);

/// Closed-form coincidence probability behind polarizers at theta1 (partner)
/// and theta2 (interferometer photon) for interference factor `phi`:
/// 1/2 [cos^2 t1 sin^2 t2 + cos^2 t2 sin^2 t1 + 2 phi cos t1 sin t2 cos t2 sin t1].
double joint_probability(double theta1, double theta2, double phi);

/// Same with phi = phi_factor(nu, cell, phi_extra).
double joint_probability(double theta1, double theta2, Complex nu, const KerrCellSpec& cell,
                         double phi_extra);

/// Projective coincidence probability evaluated on a joint state.
double joint_probability(const QuantumState& state, double theta1, double theta2);

/// Single-photon detection probability behind one polarizer; 1/2 for every
/// angle for this state family.
double singles_probability(double theta);

/// Brute-force marginal of `photon` behind a polarizer at `theta`.
double singles_probability(const QuantumState& state, std::size_t photon, double theta);

/// Assembles the six Clauser-Horne terms from the closed-form probabilities.
CHSReport chs_sum(const PolarizerAngles& angles, double phi);

/// Same terms from projective measurements on `state`; phi_used is left 0.
CHSReport chs_sum(const QuantumState& state, const PolarizerAngles& angles);

/// Optimum of the Clauser-Horne sum over all angles, (sqrt(1 + phi^2) - 1) / 2.
double chs_optimum(double phi);

/// Angles that maximize the sum at phi = 1; used for the fixed-angle variant.
PolarizerAngles fixed_reference_angles();

struct ChsSearchOptions {
    int grid_points = 32;            ///< per angle, over [0, pi)
    double stationarity = 1e-10;     ///< gradient norm at which refinement stops
    int max_sweeps = 100000;
    unsigned threads = 0;            ///< 0 = hardware concurrency
};

struct ChsSearchStats {
    double coarse_best = 0.0;
    double gradient_norm = 0.0;
    int sweeps = 0;
};

/// Global maximum of the Clauser-Horne sum over the four polarizer angles:
/// exhaustive grid over the full torus, then coordinate ascent from every
/// block winner. Ties go to the lexicographically smallest angles.
CHSReport maximize_chs(double phi, const ChsSearchOptions& options = {},
                       ChsSearchStats* stats = nullptr);

struct CoherenceChsRow {
    double gamma = 0.0;
    double phi_effective = 0.0;
    CHSReport best;
    double fixed_angle_chs = 0.0;
};

/// Maximized sum for each coherence factor, with phi_effective = gamma * phi0.
std::vector<CoherenceChsRow> chs_vs_coherence(double phi0, std::span<const double> gammas,
                                              const ChsSearchOptions& options = {});

} // namespace qndi
