#pragma once

// Truncated Fock-space primitives: coherent states, number-diagonal phase
// operators, overlaps, and a flattened register ⊗ probe joint state.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace qndi {

using Complex = std::complex<double>;

/// Largest discarded Poisson tail accepted by coherent_state() by default.
inline constexpr double kDefaultTruncationTolerance = 1e-12;

/// Raised when a Fock cutoff discards more probability than allowed.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Amplitudes over photon numbers 0..n_max.
class FockVector {
public:
    FockVector() = default;
    explicit FockVector(int n_max);
    explicit FockVector(std::vector<Complex> amps);

    int n_max() const { return static_cast<int>(amps_.size()) - 1; }
    std::size_t size() const { return amps_.size(); }

    Complex operator[](std::size_t n) const { return amps_[n]; }
    Complex& operator[](std::size_t n) { return amps_[n]; }

    std::span<const Complex> amps() const { return amps_; }
    std::span<Complex> amps() { return amps_; }

    double squared_norm() const;

    FockVector& operator*=(Complex factor);
    FockVector& operator+=(const FockVector& other);

    friend FockVector operator*(Complex factor, FockVector v) { return v *= factor; }
    friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }

private:
    std::vector<Complex> amps_;
};

/// Cutoff rule ceil(|nu|^2 + 10|nu| + 20).
int truncation_bound(Complex nu);

/// P(N > n_max) for N ~ Poisson(mean).
double poisson_tail(double mean, int n_max);

/// Checks the cutoff rule against `tolerance` for every |nu| on a grid up to
/// `max_abs_nu`. Throws TruncationError on the first failure.
void verify_truncation_rule(double max_abs_nu = 4.0,
                            double tolerance = kDefaultTruncationTolerance);

/// Coherent state |nu> truncated at n_max, not renormalized.
///
/// Amplitudes are built from a running log-magnitude so no factorial is ever
/// formed. Throws std::invalid_argument for n_max < 0 and TruncationError when
/// the discarded tail exceeds `tolerance`.
FockVector coherent_state(Complex nu, int n_max,
                          double tolerance = kDefaultTruncationTolerance);

/// Same, with n_max = truncation_bound(nu).
FockVector coherent_state(Complex nu);

/// exp(-i theta n) applied elementwise.
FockVector number_phase_apply(const FockVector& state, double theta);

/// exp(-i (theta / 2) n^2) applied elementwise (self-Kerr term).
FockVector quadratic_phase_apply(const FockVector& state, double theta);

/// <a|b> = sum conj(a_n) b_n. Throws std::invalid_argument on cutoff mismatch.
Complex overlap(const FockVector& a, const FockVector& b);

/// Row-major 2x2 operator on a two-level register.
struct Matrix2 {
    Complex m00, m01, m10, m11;
};

/// Amplitudes over (discrete registers) ⊗ (probe Fock levels 0..n_max).
///
/// Storage is flattened with the register indices first (row-major) and the
/// probe photon number last, so each register configuration owns one
/// contiguous probe branch.
class QuantumState {
public:
    QuantumState(std::vector<int> register_dims, int n_max);

    /// |registers> ⊗ |probe>; `register_amps` is the joint register vector in
    /// row-major order.
    static QuantumState product(std::vector<int> register_dims,
                                std::span<const Complex> register_amps,
                                const FockVector& probe);

    const std::vector<int>& register_dims() const { return dims_; }
    int n_max() const { return n_max_; }
    std::size_t dimension() const { return amps_.size(); }
    std::size_t branch_count() const { return amps_.size() / probe_dim(); }

    std::span<const Complex> amps() const { return amps_; }

    /// Flat branch index for one outcome per register.
    std::size_t branch_index(std::span<const int> outcomes) const;
    std::size_t branch_index(std::initializer_list<int> outcomes) const {
        return branch_index(std::span<const int>(outcomes.begin(), outcomes.size()));
    }

    /// Outcome of register `reg` within flat branch `branch`.
    int outcome_of(std::size_t branch, std::size_t reg) const;

    FockVector probe_branch(std::size_t branch) const;
    void set_probe_branch(std::size_t branch, const FockVector& probe);

    double squared_norm() const;

    /// Probability that register `reg` reads `outcome`, summed over all other
    /// registers and the probe.
    double marginal_probability(std::size_t reg, int outcome) const;

    /// Applies `op` to a two-level register.
    QuantumState apply_register_operator(std::size_t reg, const Matrix2& op) const;

    /// Multiplies every amplitude whose register `reg` reads `outcome` by `phase`.
    QuantumState apply_conditional_phase(std::size_t reg, int outcome, Complex phase) const;

    /// exp(-i theta n_probe) on the branches where register `reg` reads `outcome`.
    QuantumState apply_conditional_number_phase(std::size_t reg, int outcome,
                                                double theta) const;

    /// Contracts register `reg` with <bra| and removes it from the state.
    QuantumState contract(std::size_t reg, std::span<const Complex> bra) const;

private:
    std::size_t probe_dim() const { return static_cast<std::size_t>(n_max_) + 1; }
    std::size_t stride(std::size_t reg) const;
    void check_register(std::size_t reg, int outcome) const;

    std::vector<int> dims_;
    int n_max_;
    std::vector<Complex> amps_;
};

} // namespace qndi
