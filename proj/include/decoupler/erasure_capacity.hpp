#pragma once

#include "decoupler/operator_core.hpp"

namespace decoupler {

/// Erasure channel on a d-dimensional input: with probability p the state is
/// replaced by the flag |e><e|, orthogonal to the input space (index d of the
/// enlarged output).
struct DvErasureChannel {
    std::int64_t d;
    double p;
};

/// Bosonic erasure channel on a truncated mode: the input is either passed
/// with its spin flag up, or replaced by vacuum with the flag down.
struct CvErasureChannel {
    int cutoff;
    double p;
};

/// Random-coding parameters: K squeezed pairs sent through N channel uses
/// with erased fraction p, input squeeze r, per-mode squeeze r0 after
/// scrambling (sinh^2 r0 = K sinh^2 r / N).
struct CodingParameters {
    int n_uses;      // N
    int k_pairs;     // K
    double p;        // erased fraction; p*N must be an integer
    double r;        // input squeeze strength
    double r0;       // per-mode squeeze after scrambling
};

CodingParameters make_coding_parameters(int n_uses, int k_pairs, double p, double r);
void validate_coding_parameters(const CodingParameters& params);

/// (1-p) rho (+) p |e><e| on the d+1 dimensional output.
DensityOperator apply_dv_erasure(const DensityOperator& rho, const DvErasureChannel& channel);

/// (1-p) rho (x) |up><up| + p |0><0| (x) |down><down| on [cutoff+1, 2];
/// flag marginal is diag(1-p, p).
DensityOperator apply_cv_erasure(const DensityOperator& rho_cv, const CvErasureChannel& channel);

/// max{(1-2p) log2 d, 0}, bits per use.
double dv_capacity(double p, std::int64_t d);

/// (1-2p) E(r0), bits per mode; negative raw values are clamped to zero with
/// the clamp flagged (the raw value stays available for analysis).
struct CvCapacity {
    double bits;
    double raw_bits;
    bool clamped;
};
CvCapacity cv_capacity(double p, double r0);

/// gamma = K E(r) / N, bits per mode.
double rate(int k_pairs, int n_uses, double r);

/// The asymptotic decoupling bound, evaluated through both algebraic forms
///   2^{-[(1/2-p) E(r0) - gamma/2] N}  and  2^{(K/2) E(r) - (1/2-p) N E(r0)},
/// which are asserted equal to 1e-12 before the value is returned.
double decoupling_bound(const CodingParameters& params);

/// Exact finite-dimension bound sqrt(d_R d_A2 / d_A1 * purity).
double finite_dim_bound(double d_r, double d_a1, double d_a2, double purity);

/// Appendix-style truncated-Fock bound. `value` is the exact dimension ratio
/// sqrt(n_c^{K+pN} / n_c^{(1-p)N}); the (Q - gamma) parameterization is
/// reported alongside (it differs from the ratio by a factor of 2 in the
/// exponent, and we do not guess which convention was intended).
struct TruncatedBound {
    double value;            // sqrt(d_RA2 / d_A1)
    double q_minus_gamma;    // (1-2p) log2 n_c - (K/N) log2 n_c
    double paper_form_value; // 2^{-N (Q - gamma)}
};
TruncatedBound truncated_bound(int n_uses, int k_pairs, double p, std::int64_t n_c);

} // namespace decoupler
