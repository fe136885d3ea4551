#pragma once

#include "decoupler/operator_core.hpp"
#include "decoupler/rng.hpp"

namespace decoupler {

/// k=2 Weingarten values on U(d): 1/(d^2-1) when the permutations agree,
/// -1/(d(d^2-1)) when they differ by a transposition. Singular at d=1.
struct WeingartenTable2 {
    std::int64_t d;
    double wg_same;
    double wg_cross;
};

WeingartenTable2 weingarten_table2(std::int64_t d);

/// Average of U rho U^dag over the Haar measure: exactly I/d.
DensityOperator twirl_single(const DensityOperator& rho);

/// Double twirl T(X) = int dU (U^dag)x2 X (U)x2 on two copies of a
/// d-dimensional space, from the k=2 Weingarten closed form:
///   [tr X - tr(XF)/d] I/(d^2-1) + [tr(XF) - tr X/d] F/(d^2-1).
Matrix twirl_double(const Matrix& x);

/// Double twirl of X = F_{A2A2'} (x) I_{A1A1'} for A = A1 (x) A2, returned as
/// coefficients of I and F on the two copies of A, together with the
/// bounding pair (1/d_A2, 1/d_A1) that dominates them componentwise.
struct SplitTwirl {
    double coeff_identity;
    double coeff_swap;
    double bound_identity; // 1/d2
    double bound_swap;     // 1/d1
};

SplitTwirl twirl_double_split(std::int64_t d1, std::int64_t d2);

/// The operator X = F_{A2A2'} (x) I_{A1A1'} on spec [d1,d2,d1,d2].
Matrix split_swap_operator(std::int64_t d1, std::int64_t d2);

// Monte-Carlo validators for the analytic twirls. The analytic forms are the
// defaults everywhere; sampling exists only to cross-check them.
Matrix twirl_single_mc(const DensityOperator& rho, int samples, RngStream& rng);
Matrix twirl_double_mc(const Matrix& x, int samples, RngStream& rng);

} // namespace decoupler
