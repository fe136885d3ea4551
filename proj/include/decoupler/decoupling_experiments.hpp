#pragma once

#include "decoupler/bosonic_fock.hpp"
#include "decoupler/erasure_capacity.hpp"
#include "decoupler/haar_sampling.hpp"
#include "decoupler/operator_core.hpp"
#include "decoupler/rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace decoupler {

struct DvExperimentConfig {
    std::int64_t local_dim = 2; // q
    int n_systems = 4;          // N
    int k_pairs = 1;            // K
    int erased_count = 1;       // p N
    int samples = 200;          // M
    std::uint64_t seed = 0;
    int threads = 1;
};

/// How the base occupancy distribution of the typical subspace is obtained:
/// estimated from dephased single-mode marginals over presampled passive
/// circuits (honest at finite N), or taken as the thermal distribution with
/// n = K sinh^2 r / N (the large-N limit).
enum class MarginalMode { Empirical, AnalyticThermal };

struct CvExperimentConfig {
    int n_modes = 3; // N
    int k_pairs = 1; // K
    double r = 0.8813735870195430; // arcsinh(1): one photon per squeezed mode
    int total_photon_cutoff = 4;   // M_ph
    double delta = 16.0;           // typicality half-width, bits per mode
    int erased_count = 1;
    int samples = 200;
    std::uint64_t seed = 0;
    MarginalMode marginal_mode = MarginalMode::Empirical;
    int threads = 1;
};

struct ExperimentResult {
    std::vector<double> per_sample_distances;
    double mean = 0.0;
    double std_error = 0.0;
    double bound_exact = 0.0;
    double bound_asymptotic = 0.0;
    double gamma = 0.0;
    double q_capacity = 0.0;
    std::int64_t typical_dim = 0;

    // Metadata.
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
    std::vector<std::string> warnings;

    // Finite-size dimension convention used by the exact bound (CV runs).
    std::int64_t d_r = 0;
    std::int64_t d_a1 = 0;
    std::int64_t d_a2 = 0;
    double captured_probability = 1.0;
    std::vector<double> base_marginal; // occupancy distribution behind the typical set
};

/// K maximally entangled qudit pairs scrambled by a Haar unitary on q^N;
/// the erased systems' joint state is compared against rho_R (x) I/q^e.
ExperimentResult run_dv_decoupling(const DvExperimentConfig& cfg);

/// The bosonic pipeline: TMSS pairs + vacua, a random passive circuit lifted
/// onto photon-number sectors, then a Haar unitary confined to the typical
/// subspace; the erased modes are compared against rho_R (x) Pi_A2 with
/// Pi_A2 = tr_A1[Pi_typ]/d.
ExperimentResult run_cv_decoupling(const CvExperimentConfig& cfg);

// ---- Exact decoder (decoupled => recoverable) -----------------------------

struct DecouplingViolationError : std::runtime_error {
    DecouplingViolationError(const std::string& msg, double violation_norm)
        : std::runtime_error(msg), violation(violation_norm) {}
    double violation;
};

struct DecoderOutput {
    DensityOperator recovered; // rho_RB after projective measurement + correction
    double fidelity;           // overlap with sum_k sqrt(lambda_k) |k_R>|k_B>
    double decoupling_violation;
};

/// Reconstructs the input entanglement from a tripartite pure state whose
/// reference and environment marginals factorize: measures {Pi_l} on B and
/// applies the correcting unitaries U_l from the Schmidt construction.
/// Requires the spec of psi to have exactly three factors (R, B, E);
/// throws DecouplingViolationError when ||rho_RE - rho_R x rho_E||_1 exceeds
/// the tolerance.
DecoderOutput exact_decoder(const PureState& psi_rbe, double tolerance = 1e-8);

/// Exactly decoupled tripartite pure state in the decoder's normal form:
/// psi = sum_kl sqrt(lambda_k mu_l) |k_R> |phi_kl> |l_E> with random spectra
/// and Haar-orthonormal phi. Requires d_b >= d_r * d_e.
PureState random_decoupled_state(std::int64_t d_r, std::int64_t d_b, std::int64_t d_e,
                                 RngStream& rng);

// ---- Appendix-style verification runs -------------------------------------

struct PassiveThermalReport {
    double n_bar = 0.0;
    int n_modes = 0;
    int cutoff = 0;
    int samples = 0;
    std::uint64_t seed = 0;
    double p1 = 0.0;        // n/(n+1)^2
    double q1 = 0.0;        // (n/N) / ((n/N)+1)^2
    double p1_over_n = 0.0; // the single-photon weight the averaged circuit actually assigns
    bool degenerate = false; // n = 0: both vanish, inequality check excluded
    std::vector<double> per_sample_tv;
    double mean_tv = 0.0;
    double std_error = 0.0;
    double max_offdiag_after_dephase = 0.0;
};

/// Appendix check that random passive circuits do not thermalize: compares
/// the dephased mode-0 marginal of thermal(n) (x) vacuum^(N-1) under sampled
/// circuits against thermal(n/N) in total variation.
PassiveThermalReport run_passive_thermal_check(double n_bar, int n_modes, int samples,
                                               std::uint64_t seed, int cutoff = 10);

struct ThermalReductionReport {
    int n_modes = 0;
    int total_photons = 0;
    std::int64_t sector_dim = 0;
    std::vector<double> marginal;          // exact micro-canonical single-mode marginal
    std::vector<double> thermal_reference; // geometric with matching mean
    double tv_distance = 0.0;
};

/// Exact single-mode reduction of the maximally mixed fixed-total-photon
/// state, compared against the matched-mean geometric distribution.
ThermalReductionReport run_thermal_reduction_check(int n_modes, int total_photons,
                                                   std::uint64_t seed = 0);

struct TruncatedComparisonReport {
    std::int64_t n_c = 0;
    double n_bar = 0.0;        // (n_c - 1) / 2, the matched mean photon number
    double uniform_bits = 0.0; // log2 n_c
    double thermal_bits = 0.0; // g(n_bar)
    bool thermal_wins = false;
    bool ran_decoupling = false;
    ExperimentResult dv_run;
    ExperimentResult cv_run;
};

/// Rate comparison between the truncated-Bell encoding and the thermal
/// encoding at equal mean photon number, optionally backed by small paired
/// decoupling runs.
TruncatedComparisonReport run_truncated_comparison(std::int64_t n_c, bool with_decoupling = false,
                                                   std::uint64_t seed = 0);

} // namespace decoupler
