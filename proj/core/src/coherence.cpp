#include "qndi/coherence.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qndi {

Lineshape parse_lineshape(std::string_view name) {
    if (name == "lorentzian")
        return Lineshape::lorentzian;
    if (name == "gaussian")
        return Lineshape::gaussian;
    throw std::invalid_argument("unknown lineshape '" + std::string(name) +
                                "' (expected lorentzian or gaussian)");
}

std::string_view to_string(Lineshape shape) {
    return shape == Lineshape::lorentzian ? "lorentzian" : "gaussian";
}

void validate(const CoherenceSpec& spec) {
    if (!(spec.l_coh > 0.0) || !std::isfinite(spec.l_coh))
        throw std::invalid_argument("l_coh must be > 0");
    if (!(spec.delta_x >= 0.0) || !std::isfinite(spec.delta_x))
        throw std::invalid_argument("delta_x must be >= 0");
}

double coherence_factor(const CoherenceSpec& spec) {
    validate(spec);
    const double x = spec.delta_x / spec.l_coh;
    switch (spec.lineshape) {
    case Lineshape::lorentzian:
        return std::exp(-x);
    case Lineshape::gaussian:
        return std::exp(-0.5 * std::numbers::pi * x * x);
    }
    throw std::logic_error("unhandled lineshape");
}

PhaseDistribution phase_distribution(const CoherenceSpec& spec) {
    validate(spec);
    const double x = spec.delta_x / spec.l_coh;
    switch (spec.lineshape) {
    case Lineshape::lorentzian:
        return PhaseDistribution::cauchy(x);
    case Lineshape::gaussian:
        return PhaseDistribution::normal(std::sqrt(std::numbers::pi) * x);
    }
    throw std::logic_error("unhandled lineshape");
}

double apply_dephasing(double n4, double gamma, double mean) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("gamma must lie in [0, 1]");
    return mean + gamma * (n4 - mean);
}

std::vector<FringePoint> apply_dephasing(std::span<const FringePoint> fringe, double gamma) {
    const double mean = extract_fringe(fringe).mean;
    std::vector<FringePoint> out;
    out.reserve(fringe.size());
    for (const auto& p : fringe)
        out.push_back({p.theta, apply_dephasing(p.n4, gamma, mean)});
    return out;
}

SimResult run_with_coherence(const ArmConfig& config, const ProbeSpec& probe,
                             const CoherenceSpec& spec) {
    return run_double_cell(config, probe, phase_distribution(spec));
}

} // namespace qndi
