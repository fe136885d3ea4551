#include "decoupler/operator_core.hpp"

#include "decoupler/bosonic_fock.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

using namespace decoupler;
using namespace decoupler::testing;

TEST_SUITE("operator_core") {

TEST_CASE("HilbertSpec row-major index arithmetic") {
    HilbertSpec spec({2, 3, 4});
    CHECK(spec.total_dim() == 24);
    const std::int64_t multi[] = {1, 2, 3};
    CHECK(spec.compose(multi) == 1 * 12 + 2 * 4 + 3);
    CHECK(spec.decompose(23) == std::vector<std::int64_t>{1, 2, 3});
    CHECK_THROWS_AS(HilbertSpec({2, 0}), std::invalid_argument);
}

TEST_CASE("tensor of maximally mixed qubits is maximally mixed") {
    DensityOperator half = make_density(0.5 * Matrix::Identity(2, 2), HilbertSpec({2}));
    DensityOperator quarter = tensor(half, half);
    CHECK(quarter.spec.factors() == std::vector<std::int64_t>{2, 2});
    CHECK((quarter.matrix - 0.25 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("tensor of computational basis vectors") {
    PureState zero = make_pure(basis_vector(2, 0), HilbertSpec({2}));
    PureState one = make_pure(basis_vector(2, 1), HilbertSpec({2}));
    PureState product = tensor(zero, one);
    CHECK(std::abs(product.amplitudes(1) - 1.0) < 1e-15);
    CHECK(product.amplitudes.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("tensor preserves unit trace for random factors") {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 10; ++trial) {
        DensityOperator a = random_density(HilbertSpec({2}), rng);
        DensityOperator b = random_density(HilbertSpec({2}), rng);
        DensityOperator ab = tensor(a, b);
        CHECK(std::abs(ab.matrix.trace().real() - 1.0) < 1e-12);
        validate_density(ab);
    }
}

TEST_CASE("partial trace of a Bell pair is maximally mixed") {
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    PureState psi = make_pure(bell, HilbertSpec({2, 2}));
    const std::size_t keep[] = {0};
    DensityOperator reduced = partial_trace(psi, keep);
    CHECK((reduced.matrix - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

    DensityOperator reduced_from_density = partial_trace(density_from_pure(psi), keep);
    CHECK((reduced_from_density.matrix - reduced.matrix).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial trace of a product factorizes") {
    RngStream rng(12, 0);
    DensityOperator a = random_density(HilbertSpec({3}), rng);
    DensityOperator b = random_density(HilbertSpec({2}), rng);
    const std::size_t keep[] = {0};
    DensityOperator reduced = partial_trace(tensor(a, b), keep);
    CHECK((reduced.matrix - a.matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reduced spectrum equals squared Schmidt coefficients") {
    // Oracle: SVD of the amplitude matrix reshaped along the [2,3] split.
    RngStream rng(13, 0);
    PureState psi = random_pure(HilbertSpec({2, 3}), rng);
    Matrix reshaped(2, 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) reshaped(i, j) = psi.amplitudes(i * 3 + j);
    Eigen::JacobiSVD<Matrix> svd(reshaped);

    const std::size_t keep[] = {1};
    DensityOperator reduced = partial_trace(psi, keep);
    Eigen::SelfAdjointEigenSolver<Matrix> es(reduced.matrix, Eigen::EigenvaluesOnly);
    // Two nonzero eigenvalues (descending) must match the squared singular values.
    CHECK(std::abs(es.eigenvalues()(2) - svd.singularValues()(0) * svd.singularValues()(0)) < 1e-12);
    CHECK(std::abs(es.eigenvalues()(1) - svd.singularValues()(1) * svd.singularValues()(1)) < 1e-12);
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-12);
}

TEST_CASE("partial trace composes factor by factor") {
    RngStream rng(14, 0);
    DensityOperator rho = random_density(HilbertSpec({2, 2, 3}), rng);
    const std::size_t keep_02[] = {0, 2};
    const std::size_t keep_0_of_02[] = {0};
    const std::size_t keep_0[] = {0};
    DensityOperator joint = partial_trace(rho, keep_0);
    DensityOperator stepwise = partial_trace(partial_trace(rho, keep_02), keep_0_of_02);
    CHECK((joint.matrix - stepwise.matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace edge cases") {
    RngStream rng(15, 0);
    DensityOperator rho = random_density(HilbertSpec({2, 2}), rng);
    CHECK_THROWS_AS(partial_trace(rho, {}), std::invalid_argument);
    DensityOperator scalar = partial_trace(rho, {}, true);
    CHECK(scalar.spec.total_dim() == 1);
    CHECK(std::abs(scalar.matrix(0, 0).real() - 1.0) < 1e-12);
    const std::size_t bad[] = {7};
    CHECK_THROWS_AS(partial_trace(rho, bad), std::invalid_argument);
}

TEST_CASE("trace norm basics") {
    CHECK(trace_norm(Matrix::Zero(3, 3)) == doctest::Approx(0.0));
    Matrix x = Matrix::Zero(2, 2);
    x(0, 0) = 1.0;
    x(1, 1) = -1.0;
    CHECK(trace_norm(x) == doctest::Approx(2.0));
    CHECK_THROWS_AS(trace_norm(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("trace norm equals the absolute eigenvalue sum for Hermitian input") {
    RngStream rng(16, 0);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix x = random_hermitian(5, rng);
        Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
        CHECK(std::abs(trace_norm(x) - es.eigenvalues().cwiseAbs().sum()) < 1e-10);
    }
}

TEST_CASE("hs norm basics and the norm comparison chain") {
    CHECK(hs_norm(Matrix::Zero(4, 4)) == doctest::Approx(0.0));
    CHECK(hs_norm(Matrix::Identity(5, 5)) == doctest::Approx(std::sqrt(5.0)));

    RngStream rng(17, 0);
    for (std::int64_t d : {2, 4, 6}) {
        for (int trial = 0; trial < 100; ++trial) {
            Matrix x = random_hermitian(d, rng);
            CHECK(trace_norm(x) <= std::sqrt(static_cast<double>(d)) * hs_norm(x) + 1e-10);
        }
    }
}

TEST_CASE("swap operator") {
    CHECK(swap_operator(1).rows() == 1);
    CHECK(std::abs(swap_operator(1)(0, 0) - 1.0) < 1e-15);

    const Matrix f2 = swap_operator(2);
    CHECK(f2.trace().real() == doctest::Approx(2.0));
    CHECK((f2 * f2 - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((f2 - f2.adjoint()).cwiseAbs().maxCoeff() < 1e-15);

    // F|i>|j> = |j>|i>
    const Matrix f3 = swap_operator(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(f3(j * 3 + i, i * 3 + j) - 1.0) < 1e-15);
}

TEST_CASE("swap trick computes purity") {
    RngStream rng(18, 0);
    DensityOperator sigma = random_density(HilbertSpec({3}), rng);
    const Matrix f = swap_operator(3);
    const double direct = purity(sigma);
    const double via_swap = (tensor(sigma, sigma).matrix * f).trace().real();
    CHECK(std::abs(direct - via_swap) < 1e-12);
}

TEST_CASE("swap trick on a two-factor state") {
    // tr(sigma_A^2) = tr[(sigma_AB x sigma_A'B') F_AA' I_BB']
    RngStream rng(19, 0);
    DensityOperator sigma = random_density(HilbertSpec({2, 3}), rng);
    const std::size_t keep[] = {0};
    const double lhs = purity(partial_trace(sigma, keep));
    const Matrix f = swap_factors(HilbertSpec({2, 3, 2, 3}), 0, 2);
    const double rhs = (tensor(sigma, sigma).matrix * f).trace().real();
    CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("von Neumann entropy") {
    RngStream rng(20, 0);
    PureState psi = random_pure(HilbertSpec({4}), rng);
    CHECK(von_neumann_entropy(density_from_pure(psi)) < 1e-10);

    DensityOperator mixed = make_density(Matrix::Identity(8, 8) / 8.0, HilbertSpec({8}));
    CHECK(von_neumann_entropy(mixed) == doctest::Approx(3.0));

    // Thermal n=1 at cutoff 40: entropy equals g(1) = 2 bits.
    DensityOperator thermal = thermal_state(1.0, 40, true);
    CHECK(std::abs(von_neumann_entropy(thermal) - 2.0) < 1e-6);
}

TEST_CASE("entropy rejects genuinely negative spectra") {
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    CHECK_THROWS_AS(von_neumann_entropy(DensityOperator{bad, HilbertSpec({2})}),
                    std::invalid_argument);
}

TEST_CASE("purity") {
    RngStream rng(21, 0);
    PureState psi = random_pure(HilbertSpec({5}), rng);
    CHECK(purity(density_from_pure(psi)) == doctest::Approx(1.0));
    DensityOperator mixed = make_density(Matrix::Identity(4, 4) / 4.0, HilbertSpec({4}));
    CHECK(purity(mixed) == doctest::Approx(0.25));

    DensityOperator rho = random_density(HilbertSpec({6}), rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix, Eigen::EigenvaluesOnly);
    CHECK(std::abs(purity(rho) - es.eigenvalues().array().square().sum()) < 1e-12);
}

TEST_CASE("validating constructors reject invariant violations") {
    Vector bad = Vector::Ones(2);
    CHECK_THROWS_AS(make_pure(bad, HilbertSpec({2})), std::invalid_argument);

    Matrix not_hermitian = Matrix::Zero(2, 2);
    not_hermitian(0, 1) = 1.0;
    not_hermitian(0, 0) = not_hermitian(1, 1) = 0.5;
    CHECK_THROWS_AS(make_density(not_hermitian, HilbertSpec({2})), std::invalid_argument);

    Matrix negative = Matrix::Identity(2, 2);
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    CHECK_THROWS_AS(make_density(negative, HilbertSpec({2})), std::invalid_argument);
}

} // TEST_SUITE
