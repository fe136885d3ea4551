#include "decoupler/decoupling_experiments.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace decoupler {

namespace {

constexpr double kSpectralCut = 1e-12; // eigenvalues below this carry no weight

struct Spectrum {
    std::vector<double> values;  // descending, > kSpectralCut
    std::vector<Vector> vectors;
};

Spectrum significant_spectrum(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    Spectrum s;
    for (Eigen::Index k = es.eigenvalues().size(); k-- > 0;) {
        const double lambda = es.eigenvalues()(k);
        if (lambda <= kSpectralCut) continue;
        s.values.push_back(lambda);
        s.vectors.push_back(es.eigenvectors().col(k));
    }
    return s;
}

// Unitary factor of the polar decomposition of A; maps the right singular
// directions onto the left ones, which is exactly the phase-correct choice
// for U_l |phi_kl> = |k_B>.
Matrix polar_unitary(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

} // namespace

DecoderOutput exact_decoder(const PureState& psi_rbe, double tolerance) {
    if (psi_rbe.spec.n_factors() != 3)
        throw std::invalid_argument("exact_decoder: spec must have exactly three factors (R, B, E)");
    validate_pure(psi_rbe);
    const auto d_r = psi_rbe.spec.factor(0);
    const auto d_b = psi_rbe.spec.factor(1);
    const auto d_e = psi_rbe.spec.factor(2);

    const std::size_t keep_re[] = {0, 2};
    const std::size_t keep_r[] = {0};
    const std::size_t keep_b[] = {1};
    const std::size_t keep_e[] = {2};
    DensityOperator rho_re = partial_trace(psi_rbe, keep_re);
    DensityOperator rho_r = partial_trace(psi_rbe, keep_r);
    DensityOperator rho_e = partial_trace(psi_rbe, keep_e);

    const double violation = trace_norm(rho_re.matrix - tensor(rho_r, rho_e).matrix);
    if (violation > tolerance) {
        std::ostringstream msg;
        msg << "exact_decoder: decoupling violated, ||rho_RE - rho_R x rho_E||_1 = " << violation
            << " exceeds tolerance " << tolerance;
        throw DecouplingViolationError(msg.str(), violation);
    }

    const Spectrum spec_r = significant_spectrum(rho_r.matrix);
    const Spectrum spec_e = significant_spectrum(rho_e.matrix);
    const auto n_k = static_cast<std::int64_t>(spec_r.values.size());
    const auto n_l = static_cast<std::int64_t>(spec_e.values.size());
    if (n_k > d_b)
        throw std::invalid_argument("exact_decoder: rank of rho_R exceeds dim B, not recoverable");

    // Schmidt vectors |phi_kl> = <k_R| <l_E| psi> / sqrt(lambda_k mu_l).
    std::vector<std::vector<Vector>> phi(static_cast<std::size_t>(n_l));
    for (std::int64_t l = 0; l < n_l; ++l) {
        phi[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(n_k));
        for (std::int64_t k = 0; k < n_k; ++k) {
            Vector v = Vector::Zero(d_b);
            const Vector& kr = spec_r.vectors[static_cast<std::size_t>(k)];
            const Vector& le = spec_e.vectors[static_cast<std::size_t>(l)];
            for (std::int64_t r = 0; r < d_r; ++r) {
                if (kr(r) == Complex(0.0, 0.0)) continue;
                for (std::int64_t e = 0; e < d_e; ++e) {
                    if (le(e) == Complex(0.0, 0.0)) continue;
                    const Complex weight = std::conj(kr(r)) * std::conj(le(e));
                    for (std::int64_t b = 0; b < d_b; ++b)
                        v(b) += weight * psi_rbe.amplitudes((r * d_b + b) * d_e + e);
                }
            }
            v /= std::sqrt(spec_r.values[static_cast<std::size_t>(k)] *
                           spec_e.values[static_cast<std::size_t>(l)]);
            phi[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = std::move(v);
        }
    }

    // Per outcome l: projector onto span{phi_kl}_k and the correcting unitary.
    const std::size_t keep_rb[] = {0, 1};
    DensityOperator rho_rb = partial_trace(psi_rbe, keep_rb);
    Matrix recovered = Matrix::Zero(d_r * d_b, d_r * d_b);
    for (std::int64_t l = 0; l < n_l; ++l) {
        Matrix projector = Matrix::Zero(d_b, d_b);
        Matrix pairing = Matrix::Zero(d_b, d_b); // sum_k |k_B><phi_kl|
        for (std::int64_t k = 0; k < n_k; ++k) {
            const Vector& v = phi[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
            projector += v * v.adjoint();
            pairing.row(k) += v.adjoint();
        }
        const Matrix kraus = polar_unitary(pairing) * projector;
        Matrix lifted = Matrix::Zero(d_r * d_b, d_r * d_b);
        for (std::int64_t r = 0; r < d_r; ++r)
            lifted.block(r * d_b, r * d_b, d_b, d_b) = kraus;
        recovered += lifted * rho_rb.matrix * lifted.adjoint();
    }

    // Target: the input entanglement re-expressed on R x B.
    Vector target = Vector::Zero(d_r * d_b);
    for (std::int64_t k = 0; k < n_k; ++k) {
        const Vector& kr = spec_r.vectors[static_cast<std::size_t>(k)];
        const double w = std::sqrt(spec_r.values[static_cast<std::size_t>(k)]);
        for (std::int64_t r = 0; r < d_r; ++r) target(r * d_b + k) += w * kr(r);
    }
    const double fidelity = (target.adjoint() * recovered * target).value().real();

    DecoderOutput out{DensityOperator{std::move(recovered), HilbertSpec({d_r, d_b})}, fidelity,
                      violation};
    return out;
}

PureState random_decoupled_state(std::int64_t d_r, std::int64_t d_b, std::int64_t d_e,
                                 RngStream& rng) {
    if (d_r < 1 || d_b < 1 || d_e < 1)
        throw std::invalid_argument("random_decoupled_state: dimensions must be >= 1");
    if (d_b < d_r * d_e)
        throw std::invalid_argument("random_decoupled_state: requires d_b >= d_r * d_e");

    // Random spectra with a floor so every branch carries visible weight.
    auto random_spectrum = [&](std::int64_t n) {
        std::vector<double> lambda(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (auto& x : lambda) {
            x = -std::log(1.0 - rng.uniform()) + 0.05;
            sum += x;
        }
        for (auto& x : lambda) x /= sum;
        return lambda;
    };
    const auto lambda = random_spectrum(d_r);
    const auto mu = random_spectrum(d_e);
    const UnitarySample v = haar_unitary(d_b, rng); // columns give orthonormal phi_kl

    Vector psi = Vector::Zero(d_r * d_b * d_e);
    for (std::int64_t k = 0; k < d_r; ++k)
        for (std::int64_t l = 0; l < d_e; ++l) {
            const double w = std::sqrt(lambda[static_cast<std::size_t>(k)] *
                                       mu[static_cast<std::size_t>(l)]);
            const auto phi = v.matrix.col(k * d_e + l);
            for (std::int64_t b = 0; b < d_b; ++b)
                psi((k * d_b + b) * d_e + l) = w * phi(b);
        }
    return make_pure(std::move(psi), HilbertSpec({d_r, d_b, d_e}));
}

} // namespace decoupler
