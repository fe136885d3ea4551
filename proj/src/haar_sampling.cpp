#include "decoupler/haar_sampling.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace decoupler {

UnitarySample haar_unitary(std::int64_t d, RngStream& rng) {
    if (d < 1) throw std::invalid_argument("haar_unitary: dimension must be >= 1");
    Matrix ginibre(d, d);
    for (std::int64_t i = 0; i < d; ++i)
        for (std::int64_t j = 0; j < d; ++j) ginibre(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<Matrix> qr(ginibre);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (std::int64_t j = 0; j < d; ++j) {
        const Complex rjj = r(j, j);
        const double mag = std::abs(rjj);
        q.col(j) *= (mag > 0.0) ? rjj / mag : Complex(1.0, 0.0);
    }
    return UnitarySample{std::move(q), HilbertSpec({d}), std::nullopt};
}

UnitarySample haar_unitary_on_subspace(std::span<const std::int64_t> basis,
                                       std::int64_t full_dim, RngStream& rng) {
    if (basis.empty()) throw std::invalid_argument("haar_unitary_on_subspace: empty basis");
    std::unordered_set<std::int64_t> seen;
    for (auto b : basis) {
        if (b < 0 || b >= full_dim)
            throw std::invalid_argument("haar_unitary_on_subspace: basis index out of range");
        if (!seen.insert(b).second)
            throw std::invalid_argument("haar_unitary_on_subspace: duplicate basis index");
    }
    const auto k = static_cast<std::int64_t>(basis.size());
    UnitarySample inner = haar_unitary(k, rng);
    Matrix u = Matrix::Identity(full_dim, full_dim);
    for (std::int64_t i = 0; i < k; ++i) u(basis[i], basis[i]) = 0.0;
    for (std::int64_t i = 0; i < k; ++i)
        for (std::int64_t j = 0; j < k; ++j) u(basis[i], basis[j]) = inner.matrix(i, j);
    return UnitarySample{std::move(u), HilbertSpec({full_dim}),
                         std::vector<std::int64_t>(basis.begin(), basis.end())};
}

} // namespace decoupler
