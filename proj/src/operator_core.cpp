#include "decoupler/operator_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decoupler {

HilbertSpec::HilbertSpec(std::vector<std::int64_t> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("HilbertSpec: factor list must be nonempty");
    for (auto d : factors_) {
        if (d < 1) throw std::invalid_argument("HilbertSpec: every factor must be >= 1");
    }
    strides_.assign(factors_.size(), 1);
    for (std::size_t k = factors_.size(); k-- > 0;) {
        if (k + 1 < factors_.size()) strides_[k] = strides_[k + 1] * factors_[k + 1];
    }
    total_dim_ = strides_[0] * factors_[0];
}

std::int64_t HilbertSpec::compose(std::span<const std::int64_t> multi) const {
    if (multi.size() != factors_.size())
        throw std::invalid_argument("HilbertSpec::compose: multi-index length mismatch");
    std::int64_t index = 0;
    for (std::size_t k = 0; k < multi.size(); ++k) {
        if (multi[k] < 0 || multi[k] >= factors_[k])
            throw std::invalid_argument("HilbertSpec::compose: digit out of range");
        index += multi[k] * strides_[k];
    }
    return index;
}

std::vector<std::int64_t> HilbertSpec::decompose(std::int64_t index) const {
    if (index < 0 || index >= total_dim_)
        throw std::invalid_argument("HilbertSpec::decompose: index out of range");
    std::vector<std::int64_t> multi(factors_.size());
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        multi[k] = index / strides_[k];
        index -= multi[k] * strides_[k];
    }
    return multi;
}

HilbertSpec HilbertSpec::subspec(std::span<const std::size_t> keep) const {
    std::vector<std::int64_t> dims;
    dims.reserve(keep.size());
    for (auto k : keep) {
        if (k >= factors_.size()) throw std::invalid_argument("HilbertSpec::subspec: index out of range");
        dims.push_back(factors_[k]);
    }
    return HilbertSpec(std::move(dims));
}

HilbertSpec HilbertSpec::concat(const HilbertSpec& a, const HilbertSpec& b) {
    std::vector<std::int64_t> dims = a.factors_;
    dims.insert(dims.end(), b.factors_.begin(), b.factors_.end());
    return HilbertSpec(std::move(dims));
}

void validate_pure(const PureState& psi, double tol) {
    if (psi.amplitudes.size() != psi.spec.total_dim())
        throw std::invalid_argument("PureState: amplitude length does not match spec");
    if (std::abs(psi.amplitudes.norm() - 1.0) > tol)
        throw std::invalid_argument("PureState: vector is not normalized");
}

void validate_density(const DensityOperator& rho, double hermitian_tol, double psd_tol,
                      double trace_tol) {
    const auto& m = rho.matrix;
    if (m.rows() != m.cols() || m.rows() != rho.spec.total_dim())
        throw std::invalid_argument("DensityOperator: matrix shape does not match spec");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > hermitian_tol)
        throw std::invalid_argument("DensityOperator: matrix is not Hermitian");
    if (std::abs(m.trace().real() - 1.0) > trace_tol || std::abs(m.trace().imag()) > trace_tol)
        throw std::invalid_argument("DensityOperator: trace is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -psd_tol)
        throw std::invalid_argument("DensityOperator: matrix is not positive semidefinite");
}

PureState make_pure(Vector amplitudes, HilbertSpec spec) {
    PureState psi{std::move(amplitudes), std::move(spec)};
    validate_pure(psi);
    return psi;
}

DensityOperator make_density(Matrix matrix, HilbertSpec spec) {
    DensityOperator rho{std::move(matrix), std::move(spec)};
    validate_density(rho);
    return rho;
}

DensityOperator density_from_pure(const PureState& psi) {
    return DensityOperator{psi.amplitudes * psi.amplitudes.adjoint(), psi.spec};
}

PureState tensor(const PureState& a, const PureState& b) {
    const auto na = a.amplitudes.size();
    const auto nb = b.amplitudes.size();
    Vector out(na * nb);
    for (Eigen::Index i = 0; i < na; ++i) out.segment(i * nb, nb) = a.amplitudes(i) * b.amplitudes;
    return PureState{std::move(out), HilbertSpec::concat(a.spec, b.spec)};
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    const auto na = a.matrix.rows();
    const auto nb = b.matrix.rows();
    Matrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            out.block(i * nb, j * nb, nb, nb) = a.matrix(i, j) * b.matrix;
    return DensityOperator{std::move(out), HilbertSpec::concat(a.spec, b.spec)};
}

namespace {

// Keep/trace bookkeeping shared by the two partial traces: enumerates the kept
// and traced index sets and the map from (kept, traced) pairs to full indices.
struct TraceSplit {
    std::vector<std::size_t> keep;
    std::vector<std::size_t> traced;
    HilbertSpec keep_spec;
    HilbertSpec full_spec;
    std::int64_t keep_dim;
    std::int64_t traced_dim;

    TraceSplit(const HilbertSpec& spec, std::span<const std::size_t> keep_set)
        : keep(keep_set.begin(), keep_set.end()),
          keep_spec({1}),
          full_spec(spec) {
        std::sort(keep.begin(), keep.end());
        if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
            throw std::invalid_argument("partial_trace: duplicate factor index in keep set");
        for (auto k : keep)
            if (k >= spec.n_factors())
                throw std::invalid_argument("partial_trace: keep index out of range");
        for (std::size_t k = 0; k < spec.n_factors(); ++k)
            if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);
        keep_spec = keep.empty() ? HilbertSpec({1}) : spec.subspec(keep);
        keep_dim = keep_spec.total_dim();
        traced_dim = 1;
        for (auto t : traced) traced_dim *= spec.factor(t);
    }

    // Full flat index from a kept flat index and a traced flat index.
    std::int64_t fuse(std::int64_t kept, std::int64_t traced_index) const {
        std::vector<std::int64_t> multi(full_spec.n_factors(), 0);
        if (!keep.empty()) {
            auto km = keep_spec.decompose(kept);
            for (std::size_t i = 0; i < keep.size(); ++i) multi[keep[i]] = km[i];
        }
        for (std::size_t i = traced.size(); i-- > 0;) {
            multi[traced[i]] = traced_index % full_spec.factor(traced[i]);
            traced_index /= full_spec.factor(traced[i]);
        }
        return full_spec.compose(multi);
    }
};

} // namespace

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> keep,
                              bool allow_scalar) {
    if (keep.empty() && !allow_scalar)
        throw std::invalid_argument("partial_trace: empty keep set (pass allow_scalar for tr rho)");
    TraceSplit split(rho.spec, keep);

    // Precompute the full-index table once; the inner loop is then pure sums.
    std::vector<std::int64_t> fused(static_cast<std::size_t>(split.keep_dim * split.traced_dim));
    for (std::int64_t a = 0; a < split.keep_dim; ++a)
        for (std::int64_t t = 0; t < split.traced_dim; ++t)
            fused[static_cast<std::size_t>(a * split.traced_dim + t)] = split.fuse(a, t);

    Matrix out = Matrix::Zero(split.keep_dim, split.keep_dim);
    for (std::int64_t a = 0; a < split.keep_dim; ++a)
        for (std::int64_t b = 0; b < split.keep_dim; ++b) {
            Complex acc(0.0, 0.0);
            for (std::int64_t t = 0; t < split.traced_dim; ++t)
                acc += rho.matrix(fused[static_cast<std::size_t>(a * split.traced_dim + t)],
                                  fused[static_cast<std::size_t>(b * split.traced_dim + t)]);
            out(a, b) = acc;
        }
    return DensityOperator{std::move(out), split.keep_spec};
}

DensityOperator partial_trace(const PureState& psi, std::span<const std::size_t> keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
    TraceSplit split(psi.spec, keep);

    // Reshape amplitudes into a keep x traced matrix; the reduced state is its Gram matrix.
    Matrix reshaped(split.keep_dim, split.traced_dim);
    for (std::int64_t a = 0; a < split.keep_dim; ++a)
        for (std::int64_t t = 0; t < split.traced_dim; ++t)
            reshaped(a, t) = psi.amplitudes(split.fuse(a, t));
    return DensityOperator{reshaped * reshaped.adjoint(), split.keep_spec};
}

double trace_norm(const Matrix& x) {
    if (x.rows() != x.cols()) throw std::invalid_argument("trace_norm: matrix must be square");
    if (x.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(x);
    return svd.singularValues().sum();
}

double hs_norm(const Matrix& x) { return x.norm(); }

Matrix swap_operator(std::int64_t d) {
    if (d < 1) throw std::invalid_argument("swap_operator: dimension must be >= 1");
    Matrix f = Matrix::Zero(d * d, d * d);
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j) f(j * d + i, i * d + j) = 1.0;
    return f;
}

Matrix swap_factors(const HilbertSpec& spec, std::size_t i, std::size_t j) {
    if (i >= spec.n_factors() || j >= spec.n_factors())
        throw std::invalid_argument("swap_factors: factor index out of range");
    if (spec.factor(i) != spec.factor(j))
        throw std::invalid_argument("swap_factors: factors must have equal dimension");
    const auto d = spec.total_dim();
    Matrix f = Matrix::Zero(d, d);
    for (std::int64_t col = 0; col < d; ++col) {
        auto multi = spec.decompose(col);
        std::swap(multi[i], multi[j]);
        f(spec.compose(multi), col) = 1.0;
    }
    return f;
}

double von_neumann_entropy(const DensityOperator& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix, Eigen::EigenvaluesOnly);
    double entropy = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        double lambda = es.eigenvalues()(k);
        if (lambda < -kPsdTol)
            throw std::invalid_argument("von_neumann_entropy: eigenvalue below -1e-10");
        if (lambda <= 0.0) continue;
        entropy -= lambda * std::log2(lambda);
    }
    return entropy;
}

double shannon_entropy_bits(std::span<const double> probs) {
    double entropy = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw std::invalid_argument("shannon_entropy_bits: negative probability");
        if (p > 0.0) entropy -= p * std::log2(p);
    }
    return entropy;
}

double purity(const DensityOperator& rho) {
    return (rho.matrix * rho.matrix).trace().real();
}

} // namespace decoupler
