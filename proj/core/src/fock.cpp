#include "qndi/fock.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numeric>
#include <string>

namespace qndi {

FockVector::FockVector(int n_max) {
    if (n_max < 0)
        throw std::invalid_argument("n_max must be >= 0");
    amps_.assign(static_cast<std::size_t>(n_max) + 1, Complex{});
}

FockVector::FockVector(std::vector<Complex> amps) : amps_(std::move(amps)) {
    if (amps_.empty())
        throw std::invalid_argument("FockVector needs at least one level");
}

double FockVector::squared_norm() const {
    double sum = 0.0;
    for (const auto& a : amps_)
        sum += std::norm(a);
    return sum;
}

FockVector& FockVector::operator*=(Complex factor) {
    for (auto& a : amps_)
        a *= factor;
    return *this;
}

FockVector& FockVector::operator+=(const FockVector& other) {
    if (other.size() != size())
        throw std::invalid_argument("FockVector cutoff mismatch");
    for (std::size_t n = 0; n < amps_.size(); ++n)
        amps_[n] += other.amps_[n];
    return *this;
}

int truncation_bound(Complex nu) {
    const double a = std::abs(nu);
    return static_cast<int>(std::ceil(a * a + 10.0 * a + 20.0));
}

double poisson_tail(double mean, int n_max) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw std::invalid_argument("Poisson mean must be finite and >= 0");
    if (n_max < 0)
        return 1.0;
    if (mean == 0.0)
        return 0.0;
    // P(N > k) = P(k + 1, mean), the regularized lower incomplete gamma.
    return boost::math::gamma_p(static_cast<double>(n_max) + 1.0, mean);
}

void verify_truncation_rule(double max_abs_nu, double tolerance) {
    constexpr int steps = 400;
    for (int i = 0; i <= steps; ++i) {
        const double a = max_abs_nu * i / steps;
        const int n_max = truncation_bound(a);
        const double tail = poisson_tail(a * a, n_max);
        if (!(tail < tolerance))
            throw TruncationError("cutoff rule leaves tail " + std::to_string(tail) +
                                  " at |nu| = " + std::to_string(a));
    }
}

FockVector coherent_state(Complex nu, int n_max, double tolerance) {
    if (n_max < 0)
        throw std::invalid_argument("n_max must be >= 0");
    if (!std::isfinite(nu.real()) || !std::isfinite(nu.imag()))
        throw std::invalid_argument("coherent amplitude must be finite");

    const double mod = std::abs(nu);
    const double tail = poisson_tail(mod * mod, n_max);
    if (tail > tolerance)
        throw TruncationError("n_max = " + std::to_string(n_max) + " discards tail " +
                              std::to_string(tail) + " > " + std::to_string(tolerance) +
                              " for |nu| = " + std::to_string(mod));

    FockVector out(n_max);
    if (mod == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const double arg = std::arg(nu);
    const double log_mod = std::log(mod);
    double log_mag = -0.5 * mod * mod;
    out[0] = std::exp(log_mag);
    for (int n = 1; n <= n_max; ++n) {
        log_mag += log_mod - 0.5 * std::log(static_cast<double>(n));
        out[n] = std::polar(std::exp(log_mag), n * arg);
    }
    return out;
}

FockVector coherent_state(Complex nu) { return coherent_state(nu, truncation_bound(nu)); }

FockVector number_phase_apply(const FockVector& state, double theta) {
    FockVector out = state;
    for (std::size_t n = 0; n < out.size(); ++n)
        out[n] *= std::polar(1.0, -theta * static_cast<double>(n));
    return out;
}

FockVector quadratic_phase_apply(const FockVector& state, double theta) {
    FockVector out = state;
    for (std::size_t n = 0; n < out.size(); ++n) {
        const double nn = static_cast<double>(n);
        out[n] *= std::polar(1.0, -0.5 * theta * nn * nn);
    }
    return out;
}

Complex overlap(const FockVector& a, const FockVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("overlap: cutoff mismatch (" + std::to_string(a.n_max()) +
                                    " vs " + std::to_string(b.n_max()) + ")");
    Complex sum{};
    for (std::size_t n = 0; n < a.size(); ++n)
        sum += std::conj(a[n]) * b[n];
    return sum;
}

// ---------------------------------------------------------------------------

QuantumState::QuantumState(std::vector<int> register_dims, int n_max)
    : dims_(std::move(register_dims)), n_max_(n_max) {
    if (n_max_ < 0)
        throw std::invalid_argument("n_max must be >= 0");
    std::size_t branches = 1;
    for (int d : dims_) {
        if (d < 1)
            throw std::invalid_argument("register dimension must be >= 1");
        branches *= static_cast<std::size_t>(d);
    }
    amps_.assign(branches * probe_dim(), Complex{});
}

QuantumState QuantumState::product(std::vector<int> register_dims,
                                   std::span<const Complex> register_amps,
                                   const FockVector& probe) {
    QuantumState out(std::move(register_dims), probe.n_max());
    if (register_amps.size() != out.branch_count())
        throw std::invalid_argument("register amplitude count does not match dims");
    for (std::size_t b = 0; b < register_amps.size(); ++b)
        out.set_probe_branch(b, register_amps[b] * probe);
    return out;
}

std::size_t QuantumState::stride(std::size_t reg) const {
    std::size_t s = 1;
    for (std::size_t r = reg + 1; r < dims_.size(); ++r)
        s *= static_cast<std::size_t>(dims_[r]);
    return s;
}

void QuantumState::check_register(std::size_t reg, int outcome) const {
    if (reg >= dims_.size())
        throw std::out_of_range("register index " + std::to_string(reg) + " out of range");
    if (outcome < 0 || outcome >= dims_[reg])
        throw std::out_of_range("outcome " + std::to_string(outcome) +
                                " out of range for register " + std::to_string(reg));
}

std::size_t QuantumState::branch_index(std::span<const int> outcomes) const {
    if (outcomes.size() != dims_.size())
        throw std::invalid_argument("need one outcome per register");
    std::size_t idx = 0;
    for (std::size_t r = 0; r < dims_.size(); ++r) {
        check_register(r, outcomes[r]);
        idx = idx * static_cast<std::size_t>(dims_[r]) + static_cast<std::size_t>(outcomes[r]);
    }
    return idx;
}

int QuantumState::outcome_of(std::size_t branch, std::size_t reg) const {
    check_register(reg, 0);
    return static_cast<int>((branch / stride(reg)) % static_cast<std::size_t>(dims_[reg]));
}

FockVector QuantumState::probe_branch(std::size_t branch) const {
    if (branch >= branch_count())
        throw std::out_of_range("branch index out of range");
    const auto first = amps_.begin() + static_cast<std::ptrdiff_t>(branch * probe_dim());
    return FockVector(std::vector<Complex>(first, first + static_cast<std::ptrdiff_t>(probe_dim())));
}

void QuantumState::set_probe_branch(std::size_t branch, const FockVector& probe) {
    if (branch >= branch_count())
        throw std::out_of_range("branch index out of range");
    if (probe.size() != probe_dim())
        throw std::invalid_argument("probe cutoff mismatch");
    std::copy(probe.amps().begin(), probe.amps().end(),
              amps_.begin() + static_cast<std::ptrdiff_t>(branch * probe_dim()));
}

double QuantumState::squared_norm() const {
    return std::accumulate(amps_.begin(), amps_.end(), 0.0,
                           [](double acc, Complex a) { return acc + std::norm(a); });
}

double QuantumState::marginal_probability(std::size_t reg, int outcome) const {
    check_register(reg, outcome);
    double p = 0.0;
    for (std::size_t b = 0; b < branch_count(); ++b) {
        if (outcome_of(b, reg) != outcome)
            continue;
        for (std::size_t n = 0; n < probe_dim(); ++n)
            p += std::norm(amps_[b * probe_dim() + n]);
    }
    return p;
}

QuantumState QuantumState::apply_register_operator(std::size_t reg, const Matrix2& op) const {
    check_register(reg, 0);
    if (dims_[reg] != 2)
        throw std::invalid_argument("Matrix2 needs a two-level register");
    QuantumState out = *this;
    const std::size_t s = stride(reg) * probe_dim();
    const std::size_t block = 2 * s;
    for (std::size_t base = 0; base < amps_.size(); base += block) {
        for (std::size_t k = 0; k < s; ++k) {
            const Complex x0 = amps_[base + k];
            const Complex x1 = amps_[base + s + k];
            out.amps_[base + k] = op.m00 * x0 + op.m01 * x1;
            out.amps_[base + s + k] = op.m10 * x0 + op.m11 * x1;
        }
    }
    return out;
}

QuantumState QuantumState::apply_conditional_phase(std::size_t reg, int outcome,
                                                   Complex phase) const {
    check_register(reg, outcome);
    QuantumState out = *this;
    for (std::size_t b = 0; b < branch_count(); ++b) {
        if (outcome_of(b, reg) != outcome)
            continue;
        for (std::size_t n = 0; n < probe_dim(); ++n)
            out.amps_[b * probe_dim() + n] *= phase;
    }
    return out;
}

QuantumState QuantumState::apply_conditional_number_phase(std::size_t reg, int outcome,
                                                          double theta) const {
    check_register(reg, outcome);
    QuantumState out = *this;
    for (std::size_t b = 0; b < branch_count(); ++b) {
        if (outcome_of(b, reg) == outcome)
            out.set_probe_branch(b, number_phase_apply(probe_branch(b), theta));
    }
    return out;
}

QuantumState QuantumState::contract(std::size_t reg, std::span<const Complex> bra) const {
    check_register(reg, 0);
    if (bra.size() != static_cast<std::size_t>(dims_[reg]))
        throw std::invalid_argument("bra length does not match register dimension");

    std::vector<int> dims = dims_;
    dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(reg));
    QuantumState out(std::move(dims), n_max_);

    const std::size_t inner = stride(reg) * probe_dim();
    const std::size_t d = static_cast<std::size_t>(dims_[reg]);
    const std::size_t outer = amps_.size() / (inner * d);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t k = 0; k < d; ++k) {
            const Complex c = std::conj(bra[k]);
            for (std::size_t i = 0; i < inner; ++i)
                out.amps_[o * inner + i] += c * amps_[(o * d + k) * inner + i];
        }
    }
    return out;
}

} // namespace qndi
