#include "decoupler/erasure_capacity.hpp"

#include "decoupler/bosonic_fock.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace decoupler;
using namespace decoupler::testing;

namespace {

// Choi operator of a channel given its action on matrix units.
template <typename Channel>
Matrix choi_operator(std::int64_t d_in, std::int64_t d_out, Channel&& channel) {
    Matrix choi = Matrix::Zero(d_out * d_in, d_out * d_in);
    for (std::int64_t i = 0; i < d_in; ++i)
        for (std::int64_t j = 0; j < d_in; ++j) {
            Matrix unit = Matrix::Zero(d_in, d_in);
            unit(i, j) = 1.0;
            const Matrix mapped = channel(unit);
            for (std::int64_t a = 0; a < d_out; ++a)
                for (std::int64_t b = 0; b < d_out; ++b)
                    choi(a * d_in + i, b * d_in + j) = mapped(a, b);
        }
    return choi;
}

} // namespace

TEST_SUITE("erasure_capacity") {

TEST_CASE("dv erasure channel action") {
    RngStream rng(50, 0);
    const DensityOperator rho = random_density(HilbertSpec({3}), rng);

    const DensityOperator identity_case = apply_dv_erasure(rho, {3, 0.0});
    CHECK((identity_case.matrix.topLeftCorner(3, 3) - rho.matrix).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(identity_case.matrix(3, 3)) < 1e-15);

    const DensityOperator erased = apply_dv_erasure(rho, {3, 1.0});
    CHECK(std::abs(erased.matrix(3, 3).real() - 1.0) < 1e-14);
    CHECK(erased.matrix.topLeftCorner(3, 3).cwiseAbs().maxCoeff() < 1e-14);

    const DensityOperator mixed = make_density(Matrix::Identity(2, 2) / 2.0, HilbertSpec({2}));
    const DensityOperator out = apply_dv_erasure(mixed, {2, 1.0 / 3.0});
    Eigen::SelfAdjointEigenSolver<Matrix> es(out.matrix, Eigen::EigenvaluesOnly);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(es.eigenvalues()(k) - 1.0 / 3.0) < 1e-12);

    CHECK_THROWS_AS(apply_dv_erasure(rho, {4, 0.5}), std::invalid_argument);
}

TEST_CASE("cv erasure channel action") {
    const DensityOperator thermal = thermal_state(1.0, 5, true);
    const CvErasureChannel channel{5, 0.5};
    const DensityOperator out = apply_cv_erasure(thermal, channel);
    CHECK(out.spec.factors() == std::vector<std::int64_t>{6, 2});

    // Flag marginal diag(1-p, p); flag-conditioned blocks are thermal and vacuum.
    const std::size_t keep_flag[] = {1};
    const DensityOperator flag = partial_trace(out, keep_flag);
    CHECK(std::abs(flag.matrix(0, 0).real() - 0.5) < 1e-12);
    CHECK(std::abs(flag.matrix(1, 1).real() - 0.5) < 1e-12);

    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            CHECK(std::abs(out.matrix(2 * i, 2 * j) - 0.5 * thermal.matrix(i, j)) < 1e-12);
            const Complex expected_down = (i == 0 && j == 0) ? Complex(0.5, 0.0) : Complex(0.0, 0.0);
            CHECK(std::abs(out.matrix(2 * i + 1, 2 * j + 1) - expected_down) < 1e-12);
        }

    const DensityOperator all = apply_cv_erasure(thermal, {5, 1.0});
    CHECK(std::abs(all.matrix(1, 1).real() - 1.0) < 1e-12);
}

TEST_CASE("both erasure maps are completely positive and trace preserving") {
    for (double p : {0.0, 0.3, 1.0}) {
        const auto dv = choi_operator(3, 4, [&](const Matrix& unit) {
            Matrix out = Matrix::Zero(4, 4);
            out.topLeftCorner(3, 3) = (1.0 - p) * unit;
            out(3, 3) = p * unit.trace();
            return out;
        });
        Eigen::SelfAdjointEigenSolver<Matrix> es(dv, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        // Trace preservation: tr_out of the Choi operator is the identity.
        Matrix tr_out = Matrix::Zero(3, 3);
        for (std::int64_t i = 0; i < 3; ++i)
            for (std::int64_t j = 0; j < 3; ++j)
                for (std::int64_t a = 0; a < 4; ++a) tr_out(i, j) += dv(a * 3 + i, a * 3 + j);
        CHECK((tr_out - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

        const std::int64_t d_cv = 3;
        const auto cv = choi_operator(d_cv, 2 * d_cv, [&](const Matrix& unit) {
            Matrix out = Matrix::Zero(2 * d_cv, 2 * d_cv);
            for (std::int64_t i = 0; i < d_cv; ++i)
                for (std::int64_t j = 0; j < d_cv; ++j) out(2 * i, 2 * j) = (1.0 - p) * unit(i, j);
            out(1, 1) += p * unit.trace();
            return out;
        });
        Eigen::SelfAdjointEigenSolver<Matrix> es_cv(cv, Eigen::EigenvaluesOnly);
        CHECK(es_cv.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("dv capacity") {
    CHECK(dv_capacity(0.5, 2) == doctest::Approx(0.0));
    CHECK(dv_capacity(0.0, 2) == doctest::Approx(1.0));
    CHECK(dv_capacity(0.25, 4) == doctest::Approx(1.0));
    CHECK(dv_capacity(0.9, 8) == doctest::Approx(0.0)); // clamped
    double previous = 10.0;
    for (double p = 0.0; p <= 1.0; p += 0.05) {
        const double q = dv_capacity(p, 5);
        CHECK(q <= previous + 1e-15);
        previous = q;
    }
}

TEST_CASE("cv capacity") {
    CHECK(cv_capacity(0.5, 1.3).bits == doctest::Approx(0.0));
    const double r0 = std::asinh(1.0);
    CHECK(cv_capacity(0.0, r0).bits == doctest::Approx(2.0));
    for (double p : {0.1, 0.2, 0.4}) {
        const auto c = cv_capacity(p, r0);
        CHECK(c.bits == doctest::Approx((1.0 - 2.0 * p) * tmss_entanglement(r0)));
        CHECK_FALSE(c.clamped);
    }
    const auto clamped = cv_capacity(0.75, r0);
    CHECK(clamped.bits == doctest::Approx(0.0));
    CHECK(clamped.clamped);
    CHECK(clamped.raw_bits < 0.0);
    // E(r0) = 1 reproduces the qubit erasure capacity 1-2p.
    // Solve g(sinh^2 r0) = 1 by bisection.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tmss_entanglement(mid) < 1.0 ? lo : hi) = mid;
    }
    CHECK(cv_capacity(0.2, lo).bits == doctest::Approx(1.0 - 0.4).epsilon(1e-6));
}

TEST_CASE("rate") {
    CHECK(rate(4, 4, 0.8) == doctest::Approx(tmss_entanglement(0.8)));
    CHECK(rate(1, 4, std::asinh(1.0)) == doctest::Approx(0.5));
    CHECK(rate(2, 6, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("decoupling bound") {
    // gamma = Q makes the exponent vanish for every N.
    for (int n : {2, 5, 9}) {
        const auto params = make_coding_parameters(n, n, 0.0, 0.7);
        CHECK(decoupling_bound(params) == doctest::Approx(1.0));
    }

    const double r = std::asinh(1.0);
    const auto params = make_coding_parameters(8, 1, 0.25, r);
    const double e_r0 = tmss_entanglement(r0_from(1, 8, r));
    CHECK(decoupling_bound(params) == doctest::Approx(std::exp2(1.0 - 2.0 * e_r0)));

    // p = 1/2: no decoupling guarantee, the bound is >= 1.
    const auto no_guarantee = make_coding_parameters(4, 2, 0.5, r);
    CHECK(decoupling_bound(no_guarantee) == doctest::Approx(std::exp2(0.5 * 2 * 2.0)));
    CHECK(decoupling_bound(no_guarantee) >= 1.0);

    CodingParameters bad = params;
    bad.r0 = 0.9 * bad.r0;
    CHECK_THROWS_AS(decoupling_bound(bad), std::invalid_argument);
    CHECK_THROWS_AS(make_coding_parameters(4, 1, 0.3, r), std::invalid_argument); // pN not integer
}

TEST_CASE("finite dimension bound") {
    CHECK(finite_dim_bound(2, 4, 2, 1.0) == doctest::Approx(1.0));
    CHECK(finite_dim_bound(2, 8, 2, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(finite_dim_bound(2, 8, 2, 0.5) == doctest::Approx(0.5));
    CHECK_THROWS_AS(finite_dim_bound(0, 1, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(finite_dim_bound(2, 2, 2, 0.0), std::invalid_argument);
}

TEST_CASE("truncated bound") {
    CHECK(truncated_bound(4, 2, 0.25, 2).value == doctest::Approx(1.0)); // K = (1-2p)N
    // n_c = 2 reduces to the qubit dimension ratio.
    const auto qubit = truncated_bound(6, 1, 1.0 / 3.0, 2);
    CHECK(qubit.value == doctest::Approx(finite_dim_bound(2.0, std::exp2(4.0), std::exp2(2.0), 1.0)));
    const auto three = truncated_bound(4, 1, 0.25, 3);
    CHECK(three.value == doctest::Approx(1.0 / std::sqrt(3.0)));
    // The paper's (Q - gamma) form is the square of the dimension ratio.
    CHECK(three.paper_form_value == doctest::Approx(three.value * three.value));
    CHECK(three.q_minus_gamma ==
          doctest::Approx((0.5 * std::log2(3.0)) - (0.25 * std::log2(3.0))));
}

TEST_CASE("thermal encoding beats the uniform one at equal energy") {
    for (std::int64_t n_c = 2; n_c <= 10; ++n_c) {
        const double n_bar = (static_cast<double>(n_c) - 1.0) / 2.0;
        CHECK(thermal_entropy(n_bar) >= std::log2(static_cast<double>(n_c)) - 1e-12);
    }
}

} // TEST_SUITE
