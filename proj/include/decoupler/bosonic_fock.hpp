#pragma once

#include "decoupler/operator_core.hpp"

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace decoupler {

using OccupationString = std::vector<int>;

/// Truncation scheme of a bosonic register: either a per-mode occupancy cap
/// or a cap on the total photon number across all modes. Passive circuits act
/// exactly (no leakage) under TotalPhoton truncation, which is the default
/// for multi-mode experiments; PerMode is kept for the truncated-Bell
/// comparison.
struct Truncation {
    enum class Kind { PerMode, TotalPhoton };
    Kind kind;
    int limit;

    static Truncation per_mode(int n_c) { return {Kind::PerMode, n_c}; }
    static Truncation total_photon(int m) { return {Kind::TotalPhoton, m}; }
};

/// Truncated multi-mode Fock space. The basis enumerates the admissible
/// occupation strings in lexicographic order; for PerMode truncation this
/// coincides with the row-major indexing of HilbertSpec.
class FockRegister {
public:
    FockRegister(int n_modes, Truncation truncation);

    int n_modes() const { return n_modes_; }
    const Truncation& truncation() const { return truncation_; }
    std::int64_t dim() const { return static_cast<std::int64_t>(basis_.size()); }
    const std::vector<OccupationString>& basis() const { return basis_; }
    const OccupationString& occupation(std::int64_t index) const;
    std::int64_t index_of(const OccupationString& occ) const;
    std::optional<std::int64_t> find(const OccupationString& occ) const;
    int total_photons(std::int64_t index) const;
    /// Maximum admissible occupancy of a single mode.
    int max_occupancy() const { return truncation_.limit; }

    /// Register over a subset of the modes, same truncation.
    FockRegister submodes(int count) const { return FockRegister(count, truncation_); }

private:
    std::uint64_t pack(const OccupationString& occ) const;

    int n_modes_;
    Truncation truncation_;
    int pack_bits_;
    std::vector<OccupationString> basis_;
    std::unordered_map<std::uint64_t, std::int64_t> lookup_;
};

/// All occupation strings of n_modes modes with exactly `total` photons,
/// lexicographic order. The fixed-energy shell of the micro-canonical checks.
std::vector<OccupationString> enumerate_fixed_total(int n_modes, int total);

// ---- State families ----------------------------------------------------

struct TwoModeSqueezedState {
    double r;
    int cutoff;
    bool renormalized;
};

struct ThermalState {
    double n_bar;
    int cutoff;
    bool renormalized;
};

/// Nonnegative occupancy distribution over 0..cutoff summing to one.
struct DiagonalModeDistribution {
    std::vector<double> probs;
};

DiagonalModeDistribution make_mode_distribution(std::vector<double> probs);

/// Two-mode squeezed state on spec [cutoff+1, cutoff+1] with Schmidt
/// coefficients tanh^n(r)/cosh(r). Renormalized by default; the raw variant
/// keeps the truncated (subnormalized) amplitudes.
PureState tmss_state(double r, int cutoff, bool renormalized = true);

/// Norm deficit of the raw truncated state: 1 - sum_n<=cutoff c_n^2.
double tmss_norm_deficit(double r, int cutoff);

/// E(r) = cosh^2 r log2 cosh^2 r - sinh^2 r log2 sinh^2 r, in bits.
double tmss_entanglement(double r);

/// g(n) = (n+1) log2(n+1) - n log2 n, the thermal-state entropy in bits.
double thermal_entropy(double n_bar);

/// Geometric occupancy weights n_bar^n / (n_bar+1)^(n+1) up to the cutoff.
std::vector<double> thermal_probs(double n_bar, int cutoff, bool renormalized = true);

DensityOperator thermal_state(double n_bar, int cutoff, bool renormalized = true);

/// 2^S(rho).
double effective_dimension(const DensityOperator& rho);

/// Squeeze strength of the per-mode thermal marginal after spreading K
/// squeezed pairs over N modes: sinh^2 r0 = K sinh^2 r / N.
double r0_from(int k_pairs, int n_modes, double r);

/// Projection onto the Fock-diagonal: zero every matrix element between
/// occupation strings that differ in any mode (or, with `mode` set, in that
/// mode only). Idempotent and trace preserving.
Matrix dephase(const Matrix& rho, const FockRegister& reg,
               std::optional<int> mode = std::nullopt);
DensityOperator dephase(const DensityOperator& rho, const FockRegister& reg,
                        std::optional<int> mode = std::nullopt);

// ---- Typical subspace ----------------------------------------------------

struct TypicalSubspaceSpec {
    DiagonalModeDistribution base;
    int n_modes;
    double delta; // per-mode half-width in bits
};

struct TypicalProjector {
    std::vector<std::int64_t> basis_indices; // into the register basis
    std::int64_t dim;
    double total_probability; // product-measure mass of the typical set
    double base_entropy;      // H(base) in bits
};

/// Strings s of the register with |-(1/N) sum_j log2 p(s_j) - H(base)| <= delta.
/// Strings containing a zero-probability occupancy are never typical.
/// Throws (with N, delta, H diagnostics) when the typical set is empty.
TypicalProjector typical_projector(const TypicalSubspaceSpec& spec, const FockRegister& reg);

// ---- Register-aware linear algebra ---------------------------------------

/// Partial trace over the complement of keep_modes. The result lives on the
/// register of the kept modes with the same truncation.
std::pair<Matrix, FockRegister> fock_partial_trace(const Matrix& rho, const FockRegister& reg,
                                                   std::span<const std::size_t> keep_modes);

/// Occupancy distribution of one mode from basis-string probabilities.
std::vector<double> mode_marginal_from_probs(std::span<const double> probs,
                                             const FockRegister& reg, int mode);

} // namespace decoupler
