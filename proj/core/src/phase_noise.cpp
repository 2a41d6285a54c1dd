#include "qndi/phase_noise.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace qndi {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<QuadratureNode> build_rule(int order) {
    // boost returns the non-negative zeros in ascending order.
    const auto zeros = boost::math::legendre_p_zeros<double>(order);
    std::vector<QuadratureNode> rule;
    rule.reserve(static_cast<std::size_t>(order));
    for (double x : zeros) {
        const double dp = boost::math::legendre_p_prime<double>(order, x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push_back({x, w});
        if (x != 0.0)
            rule.push_back({-x, w});
    }
    std::sort(rule.begin(), rule.end(),
              [](const QuadratureNode& a, const QuadratureNode& b) { return a.phase < b.phase; });
    return rule;
}

// Integrates `density` over each [edges[i], edges[i+1]].
template <class Density>
std::vector<QuadratureNode> composite(std::span<const double> edges, int order, Density density) {
    const auto rule = gauss_legendre_rule(order);
    std::vector<QuadratureNode> out;
    out.reserve(rule.size() * (edges.size() - 1));
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double half = 0.5 * (edges[i + 1] - edges[i]);
        const double mid = 0.5 * (edges[i + 1] + edges[i]);
        for (const auto& node : rule) {
            const double x = mid + half * node.phase;
            out.push_back({x, half * node.weight * density(x)});
        }
    }
    return out;
}

std::vector<double> uniform_edges(double lo, double hi, int panels) {
    std::vector<double> edges(static_cast<std::size_t>(panels) + 1);
    for (int i = 0; i <= panels; ++i)
        edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / panels;
    return edges;
}

// Breakpoints at 0, +-w, +-2w, +-4w, ... clipped to +-pi, for densities
// peaked at zero with half-width w.
std::vector<double> graded_edges(double w) {
    std::vector<double> positive{0.0};
    for (double x = w; x < kPi; x *= 2.0)
        positive.push_back(x);
    positive.push_back(kPi);
    std::vector<double> edges;
    for (auto it = positive.rbegin(); it != positive.rend(); ++it)
        edges.push_back(-*it);
    edges.insert(edges.end(), positive.begin() + 1, positive.end());
    return edges;
}

} // namespace

std::span<const QuadratureNode> gauss_legendre_rule(int order) {
    if (order < 1)
        throw std::invalid_argument("quadrature order must be >= 1");
    static std::mutex mutex;
    static std::map<int, std::vector<QuadratureNode>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, build_rule(order)).first;
    return it->second;
}

PhaseDistribution PhaseDistribution::normal(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("normal phase width must be finite and >= 0");
    return sigma == 0.0 ? none() : PhaseDistribution{Kind::normal, sigma};
}

PhaseDistribution PhaseDistribution::cauchy(double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("Cauchy phase width must be finite and >= 0");
    return scale == 0.0 ? none() : PhaseDistribution{Kind::cauchy, scale};
}

std::vector<QuadratureNode> PhaseDistribution::nodes(int order) const {
    switch (kind_) {
    case Kind::none:
        return {{0.0, 1.0}};
    case Kind::uniform: {
        const auto edges = uniform_edges(-kPi, kPi, 2);
        return composite(edges, order, [](double) { return 1.0 / (2.0 * kPi); });
    }
    case Kind::normal: {
        const double sigma = width_;
        if (sigma <= 2.0) {
            // Unwrapped; mass beyond 12 sigma is below 1e-32.
            const auto edges = uniform_edges(-12.0 * sigma, 12.0 * sigma, 8);
            const double norm = 1.0 / (sigma * std::sqrt(2.0 * kPi));
            return composite(edges, order, [=](double x) {
                const double z = x / sigma;
                return norm * std::exp(-0.5 * z * z);
            });
        }
        // Wide: wrap onto [-pi, pi) and use the Fourier series of the
        // wrapped normal, which converges like exp(-k^2 sigma^2 / 2).
        const auto edges = uniform_edges(-kPi, kPi, 4);
        return composite(edges, order, [=](double x) {
            double sum = 1.0;
            for (int k = 1; k <= 64; ++k) {
                const double term = std::exp(-0.5 * k * k * sigma * sigma);
                if (term < 1e-20)
                    break;
                sum += 2.0 * term * std::cos(k * x);
            }
            return sum / (2.0 * kPi);
        });
    }
    case Kind::cauchy: {
        // Wrapped Cauchy: sinh(s) / (2 pi (cosh(s) - cos x)), with the
        // denominator rewritten to avoid cancellation near x = 0.
        const double s = width_;
        if (s > 40.0) // first circular moment exp(-s) is below 1e-17
            return PhaseDistribution::uniform().nodes(order);
        const double sh = std::sinh(s);
        const double hs = std::sinh(0.5 * s);
        const auto edges = graded_edges(std::min(s, kPi / 2.0));
        return composite(edges, order, [=](double x) {
            const double hx = std::sin(0.5 * x);
            return sh / (2.0 * kPi * 2.0 * (hs * hs + hx * hx));
        });
    }
    }
    throw std::logic_error("unhandled phase distribution kind");
}

} // namespace qndi
