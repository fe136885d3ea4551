#include "decoupler/decoupling_experiments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <thread>

namespace decoupler {

namespace {

// Substream block reserved for pre-run estimation so it never collides with
// the per-sample streams k = 0..M-1.
constexpr std::uint64_t kPreRunStreamBase = 1'000'000;

double hermitian_trace_norm(const Matrix& x) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

void aggregate(ExperimentResult& result) {
    const auto& xs = result.per_sample_distances;
    const auto m = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x; // index order, so reruns are bit-identical
    result.mean = sum / m;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - result.mean) * (x - result.mean);
        result.std_error = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
    } else {
        result.std_error = 0.0;
    }
}

void for_each_sample(int samples, int threads, const std::function<void(int)>& body) {
    threads = std::clamp(threads, 1, samples);
    if (threads == 1) {
        for (int k = 0; k < samples; ++k) body(k);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int k = next.fetch_add(1); k < samples; k = next.fetch_add(1)) {
                try {
                    body(k);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::int64_t checked_power(std::int64_t base, int exponent, std::int64_t limit) {
    std::int64_t value = 1;
    for (int i = 0; i < exponent; ++i) {
        value *= base;
        if (value > limit) throw std::invalid_argument("experiment dimension exceeds dense limit");
    }
    return value;
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

} // namespace

ExperimentResult run_dv_decoupling(const DvExperimentConfig& cfg) {
    if (cfg.local_dim < 2) throw std::invalid_argument("run_dv_decoupling: local_dim must be >= 2");
    if (cfg.k_pairs < 1 || cfg.k_pairs > cfg.n_systems)
        throw std::invalid_argument("run_dv_decoupling: require 1 <= K <= N");
    if (cfg.erased_count < 0 || cfg.erased_count > cfg.n_systems)
        throw std::invalid_argument("run_dv_decoupling: require 0 <= erased_count <= N");
    if (cfg.samples < 1) throw std::invalid_argument("run_dv_decoupling: samples must be >= 1");

    Timer timer;
    const std::int64_t q = cfg.local_dim;
    const std::int64_t dim_a = checked_power(q, cfg.n_systems, 4096);
    const std::int64_t dim_r = checked_power(q, cfg.k_pairs, 4096);
    const std::int64_t dim_a1 = checked_power(q, cfg.n_systems - cfg.erased_count, 4096);
    const std::int64_t dim_a2 = checked_power(q, cfg.erased_count, 4096);
    const double p = static_cast<double>(cfg.erased_count) / cfg.n_systems;

    // K maximally entangled pairs, remaining systems in |0>: the A-side basis
    // state paired with R-index r is (digits of r, 0, ..., 0).
    const std::int64_t pad = checked_power(q, cfg.n_systems - cfg.k_pairs, 4096);
    const double amp = 1.0 / std::sqrt(static_cast<double>(dim_r));

    ExperimentResult result;
    result.seed = cfg.seed;
    result.per_sample_distances.assign(static_cast<std::size_t>(cfg.samples), 0.0);
    result.d_r = dim_r;
    result.d_a1 = dim_a1;
    result.d_a2 = dim_a2;

    const double avg_diag = 1.0 / static_cast<double>(dim_r * dim_a2);

    for_each_sample(cfg.samples, cfg.threads, [&](int k) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(k));
        const UnitarySample u = haar_unitary(dim_a, rng);
        // Reshape (I x U)|psi> along the (R A2) x A1 split; the reduced state
        // is the Gram matrix. The input has one A-column per R-index, so the
        // transformed amplitudes are scaled columns of U.
        Matrix reshaped(dim_r * dim_a2, dim_a1);
        for (std::int64_t r = 0; r < dim_r; ++r) {
            const std::int64_t column = r * pad;
            for (std::int64_t a1 = 0; a1 < dim_a1; ++a1)
                for (std::int64_t a2 = 0; a2 < dim_a2; ++a2)
                    reshaped(r * dim_a2 + a2, a1) = amp * u.matrix(a1 * dim_a2 + a2, column);
        }
        Matrix delta = reshaped * reshaped.adjoint();
        delta.diagonal().array() -= avg_diag;
        result.per_sample_distances[static_cast<std::size_t>(k)] = hermitian_trace_norm(delta);
    });

    aggregate(result);
    result.bound_exact = finite_dim_bound(static_cast<double>(dim_r), static_cast<double>(dim_a1),
                                          static_cast<double>(dim_a2), 1.0);
    result.bound_asymptotic = truncated_bound(cfg.n_systems, cfg.k_pairs, p, q).value;
    result.gamma = static_cast<double>(cfg.k_pairs) * std::log2(static_cast<double>(q)) /
                   cfg.n_systems;
    result.q_capacity = dv_capacity(p, q);
    result.typical_dim = dim_a;
    result.runtime_seconds = timer.seconds();
    return result;
}

namespace {

// Joint (R x A) two-mode-squeezed input under TotalPhoton truncation. The
// amplitude on (R-string m, A-string (m,0,...,0)) is prod_k tanh^{m_k} r / cosh r.
struct CvInputState {
    Vector psi; // length dim_r * dim_a, renormalized
    Vector rho_r_diag;
    double captured_probability;
};

CvInputState build_cv_input(const CvExperimentConfig& cfg, const FockRegister& reg_r,
                            const FockRegister& reg_a) {
    const auto dim_r = reg_r.dim();
    const auto dim_a = reg_a.dim();
    std::vector<double> schmidt(static_cast<std::size_t>(cfg.total_photon_cutoff) + 1);
    const double t = std::tanh(cfg.r);
    double c = 1.0 / std::cosh(cfg.r);
    for (auto& s : schmidt) {
        s = c;
        c *= t;
    }

    CvInputState state;
    state.psi = Vector::Zero(dim_r * dim_a);
    OccupationString a_string(static_cast<std::size_t>(cfg.n_modes), 0);
    for (std::int64_t ri = 0; ri < dim_r; ++ri) {
        const auto& m = reg_r.occupation(ri);
        double amp = 1.0;
        for (int k = 0; k < cfg.k_pairs; ++k) {
            amp *= schmidt[static_cast<std::size_t>(m[static_cast<std::size_t>(k)])];
            a_string[static_cast<std::size_t>(k)] = m[static_cast<std::size_t>(k)];
        }
        state.psi(ri * dim_a + reg_a.index_of(a_string)) = amp;
    }
    state.captured_probability = state.psi.squaredNorm();
    state.psi /= std::sqrt(state.captured_probability);

    // rho_R is diagonal: each A-string determines its R-string.
    state.rho_r_diag = Vector::Zero(dim_r);
    for (std::int64_t ri = 0; ri < dim_r; ++ri) {
        double mass = 0.0;
        for (std::int64_t ai = 0; ai < dim_a; ++ai)
            mass += std::norm(state.psi(ri * dim_a + ai));
        state.rho_r_diag(ri) = mass;
    }
    return state;
}

std::vector<double> empirical_base_marginal(const CvExperimentConfig& cfg,
                                            const FockRegister& reg_a, const Vector& psi,
                                            std::int64_t dim_r, int presamples) {
    const auto dim_a = reg_a.dim();
    std::vector<double> base(static_cast<std::size_t>(cfg.total_photon_cutoff) + 1, 0.0);
    std::vector<double> probs(static_cast<std::size_t>(dim_a));
    for (int j = 0; j < presamples; ++j) {
        RngStream rng(cfg.seed, kPreRunStreamBase + static_cast<std::uint64_t>(j));
        const PassiveCircuit circuit = random_passive_circuit(cfg.n_modes, rng);
        std::fill(probs.begin(), probs.end(), 0.0);
        for (std::int64_t r = 0; r < dim_r; ++r) {
            Vector block = psi.segment(r * dim_a, dim_a);
            if (block.isZero(0.0)) continue;
            block = apply_passive_to_fock(circuit, reg_a, std::move(block));
            for (std::int64_t a = 0; a < dim_a; ++a)
                probs[static_cast<std::size_t>(a)] += std::norm(block(a));
        }
        // The dephased marginal is mode independent in distribution, so all
        // modes contribute to the estimate.
        for (int mode = 0; mode < cfg.n_modes; ++mode) {
            const auto marginal = mode_marginal_from_probs(probs, reg_a, mode);
            for (std::size_t n = 0; n < base.size(); ++n) base[n] += marginal[n];
        }
    }
    double sum = 0.0;
    for (double b : base) sum += b;
    for (double& b : base) b /= sum;
    return base;
}

} // namespace

ExperimentResult run_cv_decoupling(const CvExperimentConfig& cfg) {
    if (cfg.n_modes < 1) throw std::invalid_argument("run_cv_decoupling: n_modes must be >= 1");
    if (cfg.k_pairs < 1 || cfg.k_pairs > cfg.n_modes)
        throw std::invalid_argument("run_cv_decoupling: require 1 <= K <= N");
    if (cfg.erased_count < 0 || cfg.erased_count > cfg.n_modes)
        throw std::invalid_argument("run_cv_decoupling: require 0 <= erased_count <= N");
    if (cfg.samples < 1) throw std::invalid_argument("run_cv_decoupling: samples must be >= 1");
    if (cfg.r < 0.0) throw std::invalid_argument("run_cv_decoupling: r must be >= 0");
    if (cfg.delta < 0.0) throw std::invalid_argument("run_cv_decoupling: delta must be >= 0");

    Timer timer;
    const FockRegister reg_a(cfg.n_modes, Truncation::total_photon(cfg.total_photon_cutoff));
    const FockRegister reg_r(cfg.k_pairs, Truncation::total_photon(cfg.total_photon_cutoff));
    const auto dim_a = reg_a.dim();
    const auto dim_r = reg_r.dim();

    ExperimentResult result;
    result.seed = cfg.seed;
    result.per_sample_distances.assign(static_cast<std::size_t>(cfg.samples), 0.0);

    CvInputState input = build_cv_input(cfg, reg_r, reg_a);
    result.captured_probability = input.captured_probability;
    if (input.captured_probability < 0.99)
        result.warnings.push_back(
            "truncation holds less than 99% of the squeezed-state mass; increase the cutoff");

    // Base occupancy distribution behind the typical subspace.
    if (cfg.marginal_mode == MarginalMode::Empirical) {
        result.base_marginal = empirical_base_marginal(cfg, reg_a, input.psi, dim_r, 50);
    } else {
        const double n_bar = static_cast<double>(cfg.k_pairs) * std::sinh(cfg.r) *
                             std::sinh(cfg.r) / cfg.n_modes;
        result.base_marginal = thermal_probs(n_bar, cfg.total_photon_cutoff, true);
    }

    const TypicalProjector typ = typical_projector(
        {make_mode_distribution(result.base_marginal), cfg.n_modes, cfg.delta}, reg_a);
    result.typical_dim = typ.dim;

    // A1 = kept modes (front), A2 = erased modes (back). The typical set does
    // not factor across the cut; d_A2 counts the distinct erased substrings
    // and d_A1 = ceil(d / d_A2), recorded alongside the register dimensions.
    const int kept_modes = cfg.n_modes - cfg.erased_count;
    std::vector<std::int64_t> idx_a1(static_cast<std::size_t>(dim_a), 0);
    std::vector<std::int64_t> idx_a2(static_cast<std::size_t>(dim_a), 0);
    std::int64_t dim_a1_reg = 1;
    std::int64_t dim_a2_reg = 1;
    if (cfg.erased_count > 0 && kept_modes > 0) {
        const FockRegister reg_a1(kept_modes, reg_a.truncation());
        const FockRegister reg_a2(cfg.erased_count, reg_a.truncation());
        dim_a1_reg = reg_a1.dim();
        dim_a2_reg = reg_a2.dim();
        for (std::int64_t a = 0; a < dim_a; ++a) {
            const auto& occ = reg_a.occupation(a);
            OccupationString front(occ.begin(), occ.begin() + kept_modes);
            OccupationString back(occ.begin() + kept_modes, occ.end());
            idx_a1[static_cast<std::size_t>(a)] = reg_a1.index_of(front);
            idx_a2[static_cast<std::size_t>(a)] = reg_a2.index_of(back);
        }
    } else if (cfg.erased_count == 0) {
        const FockRegister reg_a1(cfg.n_modes, reg_a.truncation());
        dim_a1_reg = reg_a1.dim();
        for (std::int64_t a = 0; a < dim_a; ++a) idx_a1[static_cast<std::size_t>(a)] = a;
    } else { // everything erased
        dim_a2_reg = dim_a;
        for (std::int64_t a = 0; a < dim_a; ++a) idx_a2[static_cast<std::size_t>(a)] = a;
    }

    // Pi_A2 = tr_A1[Pi_typ] / d, exactly; diagonal on the erased register.
    Vector pi_a2 = Vector::Zero(dim_a2_reg);
    for (auto a : typ.basis_indices)
        pi_a2(idx_a2[static_cast<std::size_t>(a)]) += 1.0 / static_cast<double>(typ.dim);
    std::int64_t distinct_a2 = 0;
    for (std::int64_t i = 0; i < dim_a2_reg; ++i)
        if (pi_a2(i).real() > 0.0) ++distinct_a2;

    result.d_r = dim_r;
    result.d_a2 = std::max<std::int64_t>(1, distinct_a2);
    result.d_a1 = (typ.dim + result.d_a2 - 1) / result.d_a2; // ceil
    Vector sigma_diag(dim_r * dim_a2_reg);
    for (std::int64_t r = 0; r < dim_r; ++r)
        for (std::int64_t t = 0; t < dim_a2_reg; ++t)
            sigma_diag(r * dim_a2_reg + t) = input.rho_r_diag(r) * pi_a2(t);

    for_each_sample(cfg.samples, cfg.threads, [&](int k) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(k));
        const PassiveCircuit circuit = random_passive_circuit(cfg.n_modes, rng);
        const UnitarySample u_t = haar_unitary_on_subspace(typ.basis_indices, dim_a, rng);

        Matrix reshaped = Matrix::Zero(dim_r * dim_a2_reg, dim_a1_reg);
        for (std::int64_t r = 0; r < dim_r; ++r) {
            Vector block = input.psi.segment(r * dim_a, dim_a);
            if (!block.isZero(0.0))
                block = u_t.matrix * apply_passive_to_fock(circuit, reg_a, std::move(block));
            for (std::int64_t a = 0; a < dim_a; ++a)
                reshaped(r * dim_a2_reg + idx_a2[static_cast<std::size_t>(a)],
                         idx_a1[static_cast<std::size_t>(a)]) = block(a);
        }
        Matrix delta = reshaped * reshaped.adjoint();
        delta.diagonal() -= sigma_diag;
        result.per_sample_distances[static_cast<std::size_t>(k)] = hermitian_trace_norm(delta);
    });

    aggregate(result);
    result.bound_exact =
        finite_dim_bound(static_cast<double>(result.d_r), static_cast<double>(result.d_a1),
                         static_cast<double>(result.d_a2), 1.0); // pure input
    const double p = static_cast<double>(cfg.erased_count) / cfg.n_modes;
    const CodingParameters params = make_coding_parameters(cfg.n_modes, cfg.k_pairs, p, cfg.r);
    result.bound_asymptotic = decoupling_bound(params);
    result.gamma = rate(cfg.k_pairs, cfg.n_modes, cfg.r);
    result.q_capacity = cv_capacity(p, params.r0).bits;
    result.runtime_seconds = timer.seconds();
    return result;
}

PassiveThermalReport run_passive_thermal_check(double n_bar, int n_modes, int samples,
                                               std::uint64_t seed, int cutoff) {
    if (n_modes < 2)
        throw std::invalid_argument("run_passive_thermal_check: n_modes must be >= 2");
    if (n_bar < 0.0)
        throw std::invalid_argument("run_passive_thermal_check: n_bar must be >= 0");
    if (samples < 1 || cutoff < 1)
        throw std::invalid_argument("run_passive_thermal_check: invalid samples/cutoff");

    PassiveThermalReport report;
    report.n_bar = n_bar;
    report.n_modes = n_modes;
    report.cutoff = cutoff;
    report.samples = samples;
    report.seed = seed;
    report.p1 = n_bar / ((n_bar + 1.0) * (n_bar + 1.0));
    const double nb = n_bar / n_modes;
    report.q1 = nb / ((nb + 1.0) * (nb + 1.0));
    report.p1_over_n = report.p1 / n_modes;
    report.degenerate = n_bar == 0.0;

    const FockRegister reg(n_modes, Truncation::total_photon(cutoff));
    const FockRegister reg_rest(n_modes - 1, reg.truncation());
    const auto input_weights = thermal_probs(n_bar, cutoff, true);
    const auto reference = thermal_probs(nb, cutoff, false); // raw: remaining mass is the tail
    const double ref_tail = 1.0 - std::accumulate(reference.begin(), reference.end(), 0.0);

    report.per_sample_tv.reserve(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        RngStream rng(seed, static_cast<std::uint64_t>(k));
        const PassiveCircuit circuit = random_passive_circuit(n_modes, rng);
        std::vector<double> probs(static_cast<std::size_t>(reg.dim()), 0.0);
        Matrix rho1 = Matrix::Zero(cutoff + 1, cutoff + 1);
        for (int t = 0; t <= cutoff; ++t) {
            const double weight = input_weights[static_cast<std::size_t>(t)];
            if (weight <= 0.0) continue;
            OccupationString occ(static_cast<std::size_t>(n_modes), 0);
            occ[0] = t;
            Vector column = Vector::Zero(reg.dim());
            column(reg.index_of(occ)) = 1.0;
            column = apply_passive_to_fock(circuit, reg, std::move(column));
            for (std::int64_t a = 0; a < reg.dim(); ++a)
                probs[static_cast<std::size_t>(a)] += weight * std::norm(column(a));
            if (k == 0) {
                // Mode-0 reduced matrix for the dephasing diagnostic.
                Matrix reshaped = Matrix::Zero(cutoff + 1, reg_rest.dim());
                for (std::int64_t a = 0; a < reg.dim(); ++a) {
                    const auto& s = reg.occupation(a);
                    OccupationString rest(s.begin() + 1, s.end());
                    reshaped(s[0], reg_rest.index_of(rest)) = column(a);
                }
                rho1 += weight * (reshaped * reshaped.adjoint());
            }
        }
        if (k == 0) {
            const FockRegister reg1(1, reg.truncation());
            const Matrix dephased = dephase(rho1, reg1);
            double max_off = 0.0;
            for (Eigen::Index i = 0; i <= cutoff; ++i)
                for (Eigen::Index j = 0; j <= cutoff; ++j)
                    if (i != j) max_off = std::max(max_off, std::abs(dephased(i, j)));
            report.max_offdiag_after_dephase = max_off;
        }
        const auto marginal = mode_marginal_from_probs(probs, reg, 0);
        double l1 = ref_tail;
        for (std::size_t n = 0; n < marginal.size(); ++n)
            l1 += std::abs(marginal[n] - reference[n]);
        report.per_sample_tv.push_back(0.5 * l1);
    }

    double sum = 0.0;
    for (double tv : report.per_sample_tv) sum += tv;
    report.mean_tv = sum / samples;
    if (samples > 1) {
        double ss = 0.0;
        for (double tv : report.per_sample_tv) ss += (tv - report.mean_tv) * (tv - report.mean_tv);
        report.std_error = std::sqrt(ss / (samples - 1.0)) / std::sqrt(static_cast<double>(samples));
    }
    return report;
}

ThermalReductionReport run_thermal_reduction_check(int n_modes, int total_photons,
                                                   std::uint64_t seed) {
    (void)seed; // exact enumeration, kept for interface uniformity
    if (n_modes < 1 || total_photons < 0)
        throw std::invalid_argument("run_thermal_reduction_check: invalid arguments");

    ThermalReductionReport report;
    report.n_modes = n_modes;
    report.total_photons = total_photons;
    const auto sector = enumerate_fixed_total(n_modes, total_photons);
    report.sector_dim = static_cast<std::int64_t>(sector.size());

    report.marginal.assign(static_cast<std::size_t>(total_photons) + 1, 0.0);
    for (const auto& occ : sector)
        report.marginal[static_cast<std::size_t>(occ[0])] += 1.0 / static_cast<double>(sector.size());

    const double n_bar = static_cast<double>(total_photons) / n_modes;
    report.thermal_reference = thermal_probs(n_bar, total_photons, false);
    const double tail =
        1.0 - std::accumulate(report.thermal_reference.begin(), report.thermal_reference.end(), 0.0);
    double l1 = tail;
    for (std::size_t n = 0; n < report.marginal.size(); ++n)
        l1 += std::abs(report.marginal[n] - report.thermal_reference[n]);
    report.tv_distance = 0.5 * l1;
    return report;
}

TruncatedComparisonReport run_truncated_comparison(std::int64_t n_c, bool with_decoupling,
                                                   std::uint64_t seed) {
    if (n_c < 2) throw std::invalid_argument("run_truncated_comparison: n_c must be >= 2");
    TruncatedComparisonReport report;
    report.n_c = n_c;
    report.n_bar = (static_cast<double>(n_c) - 1.0) / 2.0;
    report.uniform_bits = std::log2(static_cast<double>(n_c));
    report.thermal_bits = thermal_entropy(report.n_bar);
    report.thermal_wins = report.thermal_bits >= report.uniform_bits - 1e-12;

    if (with_decoupling) {
        DvExperimentConfig dv;
        dv.local_dim = n_c;
        dv.n_systems = 3;
        dv.k_pairs = 1;
        dv.erased_count = 1;
        dv.samples = 100;
        dv.seed = seed;
        report.dv_run = run_dv_decoupling(dv);

        CvExperimentConfig cv;
        cv.n_modes = 3;
        cv.k_pairs = 1;
        cv.r = std::asinh(std::sqrt(report.n_bar));
        cv.total_photon_cutoff = std::max(4, static_cast<int>(std::ceil(4.0 * report.n_bar)));
        cv.erased_count = 1;
        cv.samples = 100;
        cv.seed = seed;
        report.cv_run = run_cv_decoupling(cv);
        report.ran_decoupling = true;
    }
    return report;
}

} // namespace decoupler
