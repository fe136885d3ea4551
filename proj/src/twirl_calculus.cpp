#include "decoupler/twirl_calculus.hpp"

#include "decoupler/haar_sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace decoupler {

WeingartenTable2 weingarten_table2(std::int64_t d) {
    if (d < 2) throw std::invalid_argument("weingarten_table2: requires d >= 2");
    const double dd = static_cast<double>(d);
    return WeingartenTable2{d, 1.0 / (dd * dd - 1.0), -1.0 / (dd * (dd * dd - 1.0))};
}

DensityOperator twirl_single(const DensityOperator& rho) {
    const auto d = rho.spec.total_dim();
    Matrix out = Matrix::Identity(d, d) / static_cast<double>(d);
    return DensityOperator{std::move(out), rho.spec};
}

Matrix twirl_double(const Matrix& x) {
    const auto dim = x.rows();
    if (x.cols() != dim) throw std::invalid_argument("twirl_double: matrix must be square");
    const auto d = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (d * d != dim)
        throw std::invalid_argument("twirl_double: dimension must be a perfect square");
    if (d < 2) throw std::invalid_argument("twirl_double: Weingarten k=2 form is singular at d=1");
    const Matrix f = swap_operator(d);
    const Complex tr_x = x.trace();
    const Complex tr_xf = (x * f).trace();
    const double dd = static_cast<double>(d);
    const double denom = dd * dd - 1.0;
    const Complex ci = (tr_x - tr_xf / dd) / denom;
    const Complex cf = (tr_xf - tr_x / dd) / denom;
    return ci * Matrix::Identity(dim, dim) + cf * f;
}

SplitTwirl twirl_double_split(std::int64_t d1, std::int64_t d2) {
    if (d1 < 1 || d2 < 1) throw std::invalid_argument("twirl_double_split: dimensions must be >= 1");
    if (d1 * d2 < 2)
        throw std::invalid_argument("twirl_double_split: total dimension must be >= 2");
    const double a = static_cast<double>(d1);
    const double b = static_cast<double>(d2);
    const double d = a * b;
    const double denom = 1.0 - 1.0 / (d * d);
    SplitTwirl s;
    s.coeff_identity = (1.0 / b) * (1.0 - 1.0 / (a * a)) / denom;
    s.coeff_swap = (1.0 / a) * (1.0 - 1.0 / (b * b)) / denom;
    s.bound_identity = 1.0 / b;
    s.bound_swap = 1.0 / a;
    return s;
}

Matrix split_swap_operator(std::int64_t d1, std::int64_t d2) {
    // Swap the A2 factors of the two copies, identity on the A1 factors.
    HilbertSpec spec({d1, d2, d1, d2});
    return swap_factors(spec, 1, 3);
}

Matrix twirl_single_mc(const DensityOperator& rho, int samples, RngStream& rng) {
    if (samples < 1) throw std::invalid_argument("twirl_single_mc: samples must be >= 1");
    const auto d = rho.spec.total_dim();
    Matrix acc = Matrix::Zero(d, d);
    for (int k = 0; k < samples; ++k) {
        UnitarySample u = haar_unitary(d, rng);
        acc += u.matrix * rho.matrix * u.matrix.adjoint();
    }
    return acc / static_cast<double>(samples);
}

Matrix twirl_double_mc(const Matrix& x, int samples, RngStream& rng) {
    if (samples < 1) throw std::invalid_argument("twirl_double_mc: samples must be >= 1");
    const auto dim = x.rows();
    const auto d = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (d * d != dim)
        throw std::invalid_argument("twirl_double_mc: dimension must be a perfect square");
    Matrix acc = Matrix::Zero(dim, dim);
    for (int k = 0; k < samples; ++k) {
        UnitarySample u = haar_unitary(d, rng);
        Matrix uu(dim, dim);
        for (std::int64_t i = 0; i < d; ++i)
            for (std::int64_t j = 0; j < d; ++j)
                uu.block(i * d, j * d, d, d) = u.matrix(i, j) * u.matrix;
        acc += uu.adjoint() * x * uu;
    }
    return acc / static_cast<double>(samples);
}

} // namespace decoupler
