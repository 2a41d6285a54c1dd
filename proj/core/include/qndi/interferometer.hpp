#pragma once

// State-vector simulation of the Mach-Zehnder layout: BS I, Kerr cells on
// the arms, a phase shifter, BS II and photon counting at ports 4 and 5.
//
// A single signal photon is exact in a two-branch representation: one probe
// Fock vector per path, with the path amplitude folded into each vector.
// Branch 0 is arm 2 (then port 4 after BS II), branch 1 is arm 3 (port 5).

#include "qndi/analytic.hpp"
#include "qndi/fock.hpp"
#include "qndi/phase_noise.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace qndi {

enum class Arm { two = 0, three = 1 };

struct ProbeSpec {
    Complex nu;
    int n_max;
    double tolerance = kDefaultTruncationTolerance;
};

/// Probe with the default cutoff rule.
ProbeSpec make_probe(Complex nu);

struct ArmConfig {
    std::optional<KerrCellSpec> cell_arm2;
    std::optional<KerrCellSpec> cell_arm3;
    double theta = 0.0;
    double bs1_reflectivity = 0.5;
    double bs2_reflectivity = 0.5;
};

void validate(const ArmConfig& config);

struct PathState {
    std::array<FockVector, 2> branch;

    FockVector& operator[](Arm arm) { return branch[static_cast<std::size_t>(arm)]; }
    const FockVector& operator[](Arm arm) const { return branch[static_cast<std::size_t>(arm)]; }
    double squared_norm() const { return branch[0].squared_norm() + branch[1].squared_norm(); }
};

struct SimResult {
    double n4_expectation = 0.0;
    double n5_expectation = 0.0;
    double joint_state_norm = 0.0;
    /// <arm-2 probe | arm-3 probe>, each branch normalized, taken after the
    /// Kerr stage. Its magnitude is the fringe visibility.
    Complex probe_conditional_overlap;
};

/// Signal photon in input port 1, probe in |nu>.
PathState inject(const ProbeSpec& probe);

/// 2x2 beamsplitter with transmitted amplitude sqrt(1 - R) and reflected
/// amplitude i sqrt(R), acting on the path amplitudes.
Matrix2 beamsplitter_matrix(double reflectivity);

PathState bs_transform(const PathState& state, double reflectivity);
QuantumState bs_transform(const QuantumState& state, std::size_t path_register,
                          double reflectivity);

/// Phase exp(-i phase) on one arm.
PathState phase_shift(const PathState& state, Arm arm, double phase);

/// One Kerr cell on `arm`. The branch carrying the photon (n_s = 1) picks up
/// exp(-i 2 chi T n_p) on the probe and the self-Kerr phase exp(-i chi_s T / 2);
/// the probe self-Kerr exp(-i chi_p T n_p^2 / 2) acts on every branch.
PathState kerr_evolve(const PathState& state, Arm arm, const KerrCellSpec& cell);

/// Same for a joint state: the photon occupies the cell when register
/// `reg` reads `outcome`.
QuantumState kerr_evolve(const QuantumState& state, std::size_t reg, int outcome,
                         const KerrCellSpec& cell);

/// Deterministic signal phase a cell adds to the occupied branch.
double signal_self_phase(const KerrCellSpec& cell);

/// phi0 that makes n4_single_cell / n4_double_cell reproduce this simulator
/// for `config` (the lumped self-Kerr phases).
double equivalent_phi0(const ArmConfig& config);

/// Kerr cell on arm 3 only.
SimResult run_single_cell(const ArmConfig& config, const ProbeSpec& probe);

/// Kerr cells on both arms; `inter_cell_phase` is a random phase on the arm-2
/// branch, averaged by quadrature.
SimResult run_double_cell(const ArmConfig& config, const ProbeSpec& probe,
                          const PhaseDistribution& inter_cell_phase = PhaseDistribution::none(),
                          int quadrature_order = 64);

/// State just before BS II (after cells, inter-cell phase and theta).
PathState evolve_to_recombination(const ArmConfig& config, const ProbeSpec& probe,
                                  double inter_cell_phase = 0.0);

struct FringePoint {
    double theta;
    double n4;
};

/// n4 at every theta in `grid`, using cells as configured (either arm).
std::vector<FringePoint> fringe_scan(const ArmConfig& config, const ProbeSpec& probe,
                                     std::span<const double> grid,
                                     const PhaseDistribution& inter_cell_phase = PhaseDistribution::none());

/// n uniformly spaced points on [0, 2 pi).
std::vector<double> theta_grid(std::size_t n);

struct FringeFit {
    double mean = 0.0;          ///< constant term c0
    double amplitude = 0.0;     ///< a in c0 - a cos(theta + offset)
    double visibility = 0.0;    ///< a / c0
    double phase_offset = 0.0;  ///< offset in (-pi, pi]
    double raw_contrast = 0.0;  ///< (max - min) / (max + min) on the samples
    double argmax_theta = 0.0;  ///< sample theta of the largest n4
    double max_residual = 0.0;  ///< worst pointwise misfit of the sinusoid
};

/// Least-squares fit of c0 - a cos(theta + offset) to fringe samples. Needs at
/// least three distinct phases.
FringeFit extract_fringe(std::span<const FringePoint> samples);

/// Trace distance between the weighted probe states of the two arms,
/// Tr|w2 rho2 - w3 rho3|, taken after the Kerr stage.
double simulated_distinguishability(const ArmConfig& config, const ProbeSpec& probe);

} // namespace qndi
