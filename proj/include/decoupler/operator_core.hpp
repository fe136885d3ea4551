#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace decoupler {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Validation tolerances shared by the state types.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kNormTol = 1e-10;

/// Ordered list of local dimensions of a multi-factor Hilbert space.
/// Index arithmetic is row-major: factor 0 is the most significant digit.
class HilbertSpec {
public:
    explicit HilbertSpec(std::vector<std::int64_t> factors);

    const std::vector<std::int64_t>& factors() const { return factors_; }
    std::int64_t factor(std::size_t i) const { return factors_.at(i); }
    std::size_t n_factors() const { return factors_.size(); }
    std::int64_t total_dim() const { return total_dim_; }

    /// Flat index of a multi-index (row-major over the factor list).
    std::int64_t compose(std::span<const std::int64_t> multi) const;
    /// Inverse of compose.
    std::vector<std::int64_t> decompose(std::int64_t index) const;

    /// Spec of a subset of factors, in their original order.
    HilbertSpec subspec(std::span<const std::size_t> keep) const;

    /// Concatenation of factor lists.
    static HilbertSpec concat(const HilbertSpec& a, const HilbertSpec& b);

    bool operator==(const HilbertSpec& other) const { return factors_ == other.factors_; }

private:
    std::vector<std::int64_t> factors_;
    std::vector<std::int64_t> strides_;
    std::int64_t total_dim_ = 1;
};

/// Normalized state vector over a HilbertSpec.
struct PureState {
    Vector amplitudes;
    HilbertSpec spec;
};

/// Hermitian, positive semidefinite, unit-trace operator over a HilbertSpec.
struct DensityOperator {
    Matrix matrix;
    HilbertSpec spec;
};

/// Validating constructors. Throw std::invalid_argument when the inputs
/// violate the type invariants (norm, Hermiticity, PSD, unit trace).
PureState make_pure(Vector amplitudes, HilbertSpec spec);
DensityOperator make_density(Matrix matrix, HilbertSpec spec);

/// Invariant checks usable on externally produced objects.
void validate_pure(const PureState& psi, double tol = kNormTol);
void validate_density(const DensityOperator& rho, double hermitian_tol = kHermitianTol,
                      double psd_tol = kPsdTol, double trace_tol = kTraceTol);

DensityOperator density_from_pure(const PureState& psi);

// Kronecker products; the result spec is the concatenation of the factor lists.
PureState tensor(const PureState& a, const PureState& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

/// Partial trace keeping the listed factors (original order preserved).
/// An empty keep set is rejected unless allow_scalar is set, in which case
/// the result is the 1x1 operator [tr rho].
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep,
                              bool allow_scalar = false);

/// Reduced state of a pure state, computed from the Gram matrix of the
/// amplitude tensor reshaped along the keep/traced split.
DensityOperator partial_trace(const PureState& psi, std::span<const std::size_t> keep);

/// Sum of singular values.
double trace_norm(const Matrix& x);
/// sqrt(tr X^dag X).
double hs_norm(const Matrix& x);

/// Swap operator F on [d,d]: F|i>|j> = |j>|i>. Hermitian, F^2 = I, tr F = d.
Matrix swap_operator(std::int64_t d);

/// Operator on spec exchanging factors i and j (which must have equal dimension).
Matrix swap_factors(const HilbertSpec& spec, std::size_t i, std::size_t j);

/// -sum lambda log2 lambda over the eigenvalues, 0 log 0 := 0. Bits.
/// Eigenvalues in [-1e-10, 0) are clipped to zero; more negative is an error.
double von_neumann_entropy(const DensityOperator& rho);

/// Shannon entropy of a probability vector, in bits.
double shannon_entropy_bits(std::span<const double> probs);

/// tr rho^2.
double purity(const DensityOperator& rho);

} // namespace decoupler
