#include "decoupler/erasure_capacity.hpp"

#include "decoupler/bosonic_fock.hpp"

#include <cmath>
#include <stdexcept>

namespace decoupler {

CodingParameters make_coding_parameters(int n_uses, int k_pairs, double p, double r) {
    CodingParameters params{n_uses, k_pairs, p, r, r0_from(k_pairs, n_uses, r)};
    validate_coding_parameters(params);
    return params;
}

void validate_coding_parameters(const CodingParameters& params) {
    if (params.k_pairs < 1 || params.k_pairs > params.n_uses)
        throw std::invalid_argument("CodingParameters: require 1 <= K <= N");
    if (params.p < 0.0 || params.p > 1.0)
        throw std::invalid_argument("CodingParameters: p must lie in [0,1]");
    const double erased = params.p * params.n_uses;
    if (std::abs(erased - std::round(erased)) > 1e-9)
        throw std::invalid_argument("CodingParameters: p*N must be an integer");
    if (params.r < 0.0) throw std::invalid_argument("CodingParameters: r must be >= 0");
    const double expected = r0_from(params.k_pairs, params.n_uses, params.r);
    if (std::abs(std::sinh(params.r0) * std::sinh(params.r0) -
                 std::sinh(expected) * std::sinh(expected)) > 1e-9)
        throw std::invalid_argument("CodingParameters: r0 inconsistent with sinh^2 r0 = K sinh^2 r / N");
}

DensityOperator apply_dv_erasure(const DensityOperator& rho, const DvErasureChannel& channel) {
    if (channel.p < 0.0 || channel.p > 1.0)
        throw std::invalid_argument("apply_dv_erasure: p must lie in [0,1]");
    if (rho.spec.total_dim() != channel.d)
        throw std::invalid_argument("apply_dv_erasure: input dimension mismatch");
    const auto d = channel.d;
    Matrix out = Matrix::Zero(d + 1, d + 1);
    out.topLeftCorner(d, d) = (1.0 - channel.p) * rho.matrix;
    out(d, d) = channel.p;
    return make_density(std::move(out), HilbertSpec({d + 1}));
}

DensityOperator apply_cv_erasure(const DensityOperator& rho_cv, const CvErasureChannel& channel) {
    if (channel.p < 0.0 || channel.p > 1.0)
        throw std::invalid_argument("apply_cv_erasure: p must lie in [0,1]");
    const std::int64_t d = channel.cutoff + 1;
    if (rho_cv.spec.total_dim() != d)
        throw std::invalid_argument("apply_cv_erasure: input dimension mismatch");
    // Flag factor: index 0 = up (transmitted), index 1 = down (erased).
    Matrix out = Matrix::Zero(2 * d, 2 * d);
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j)
            out(2 * i, 2 * j) = (1.0 - channel.p) * rho_cv.matrix(i, j);
    out(1, 1) += channel.p; // vacuum (x) down
    return make_density(std::move(out), HilbertSpec({d, 2}));
}

double dv_capacity(double p, std::int64_t d) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("dv_capacity: p must lie in [0,1]");
    if (d < 2) throw std::invalid_argument("dv_capacity: d must be >= 2");
    return std::max((1.0 - 2.0 * p) * std::log2(static_cast<double>(d)), 0.0);
}

CvCapacity cv_capacity(double p, double r0) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("cv_capacity: p must lie in [0,1]");
    const double raw = (1.0 - 2.0 * p) * tmss_entanglement(r0);
    return CvCapacity{std::max(raw, 0.0), raw, raw < 0.0};
}

double rate(int k_pairs, int n_uses, double r) {
    if (k_pairs < 1 || k_pairs > n_uses) throw std::invalid_argument("rate: require 1 <= K <= N");
    return static_cast<double>(k_pairs) * tmss_entanglement(r) / n_uses;
}

double decoupling_bound(const CodingParameters& params) {
    validate_coding_parameters(params);
    const double n = params.n_uses;
    const double e_r = tmss_entanglement(params.r);
    const double e_r0 = tmss_entanglement(params.r0);
    const double gamma = params.k_pairs * e_r / n;
    const double exponent_a = -((0.5 - params.p) * e_r0 - 0.5 * gamma) * n;
    const double exponent_b = 0.5 * params.k_pairs * e_r - (0.5 - params.p) * n * e_r0;
    const double form_a = std::exp2(exponent_a);
    const double form_b = std::exp2(exponent_b);
    if (std::abs(form_a - form_b) > 1e-12 * std::max(1.0, std::abs(form_a)))
        throw std::logic_error("decoupling_bound: algebraic forms disagree");
    return form_a;
}

double finite_dim_bound(double d_r, double d_a1, double d_a2, double purity) {
    if (d_r < 1.0 || d_a1 < 1.0 || d_a2 < 1.0)
        throw std::invalid_argument("finite_dim_bound: dimensions must be >= 1");
    if (purity <= 0.0 || purity > 1.0 + 1e-12)
        throw std::invalid_argument("finite_dim_bound: purity must lie in (0,1]");
    return std::sqrt(d_r * d_a2 / d_a1 * purity);
}

TruncatedBound truncated_bound(int n_uses, int k_pairs, double p, std::int64_t n_c) {
    if (n_c < 2) throw std::invalid_argument("truncated_bound: n_c must be >= 2");
    if (k_pairs < 1 || k_pairs > n_uses)
        throw std::invalid_argument("truncated_bound: require 1 <= K <= N");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("truncated_bound: p must lie in [0,1]");
    const double log_nc = std::log2(static_cast<double>(n_c));
    const double n = n_uses;
    TruncatedBound b;
    // d_R = n_c^K, d_A2 = n_c^{pN}, d_A1 = n_c^{(1-p)N}.
    b.value = std::exp2(0.5 * (k_pairs + p * n - (1.0 - p) * n) * log_nc);
    b.q_minus_gamma = (1.0 - 2.0 * p) * log_nc - k_pairs * log_nc / n;
    b.paper_form_value = std::exp2(-n * b.q_minus_gamma);
    return b;
}

} // namespace decoupler
