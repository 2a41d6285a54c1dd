#pragma once

// Finite probe coherence between the two Kerr cells, modelled as a random
// phase between arms 2 and 3 whose spread grows with delta_x / l_coh.

#include "qndi/interferometer.hpp"
#include "qndi/phase_noise.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace qndi {

enum class Lineshape { lorentzian, gaussian };

Lineshape parse_lineshape(std::string_view name);
std::string_view to_string(Lineshape shape);

struct CoherenceSpec {
    double delta_x = 0.0; ///< probe optical path between the cells [m]
    double l_coh = 1.0;   ///< probe coherence length [m]
    Lineshape lineshape = Lineshape::lorentzian;
};

void validate(const CoherenceSpec& spec);

/// Fringe-term attenuation gamma in (0, 1]:
///   lorentzian  exp(-dx / Lc)
///   gaussian    exp(-(pi / 2) (dx / Lc)^2)
double coherence_factor(const CoherenceSpec& spec);

/// Random inter-cell phase whose mean of cos equals coherence_factor(spec):
/// Cauchy with half-width dx / Lc, or normal with variance pi (dx / Lc)^2.
PhaseDistribution phase_distribution(const CoherenceSpec& spec);

/// Scales the interference part of a fringe value about its constant term.
double apply_dephasing(double n4, double gamma, double mean = 0.5);

/// Same over a sampled fringe, using the fitted constant term.
std::vector<FringePoint> apply_dephasing(std::span<const FringePoint> fringe, double gamma);

/// Double-cell run averaged over the inter-cell phase implied by `spec`.
SimResult run_with_coherence(const ArmConfig& config, const ProbeSpec& probe,
                             const CoherenceSpec& spec);

} // namespace qndi
