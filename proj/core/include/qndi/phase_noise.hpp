#pragma once

// Random inter-arm phase distributions and the deterministic quadrature used
// to ensemble-average simulator output over them.

#include <span>
#include <vector>

namespace qndi {

struct QuadratureNode {
    double phase;
    double weight;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
std::span<const QuadratureNode> gauss_legendre_rule(int order);

class PhaseDistribution {
public:
    enum class Kind { none, uniform, normal, cauchy };

    /// Deterministic zero phase.
    static PhaseDistribution none() { return {Kind::none, 0.0}; }
    /// Uniform on [-pi, pi).
    static PhaseDistribution uniform() { return {Kind::uniform, 0.0}; }
    /// Zero-mean normal with standard deviation `sigma`.
    static PhaseDistribution normal(double sigma);
    /// Zero-centred Cauchy (Lorentzian) with half-width `scale`.
    static PhaseDistribution cauchy(double scale);

    Kind kind() const { return kind_; }
    double width() const { return width_; }

    /// Quadrature nodes over the distribution; weights sum to 1. Composite
    /// Gauss-Legendre with `order` nodes per panel, panels sized to the width.
    std::vector<QuadratureNode> nodes(int order = 64) const;

private:
    PhaseDistribution(Kind kind, double width) : kind_(kind), width_(width) {}

    Kind kind_;
    double width_;
};

} // namespace qndi
