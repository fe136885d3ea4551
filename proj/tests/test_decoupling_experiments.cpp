#include "decoupler/decoupling_experiments.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace decoupler;
using namespace decoupler::testing;

namespace {

double combined_2se(const ExperimentResult& a, const ExperimentResult& b) {
    return 2.0 * std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

} // namespace

TEST_SUITE("decoupling_experiments") {

TEST_CASE("dv: nothing erased means nothing to decouple") {
    DvExperimentConfig cfg;
    cfg.n_systems = 3;
    cfg.k_pairs = 1;
    cfg.erased_count = 0;
    cfg.samples = 20;
    cfg.seed = 5;
    const auto result = run_dv_decoupling(cfg);
    for (double d : result.per_sample_distances) CHECK(d < 1e-10);
}

TEST_CASE("dv: single scrambled Bell pair matches brute force") {
    DvExperimentConfig cfg;
    cfg.n_systems = 1;
    cfg.k_pairs = 1;
    cfg.erased_count = 1;
    cfg.samples = 25;
    cfg.seed = 77;
    const auto result = run_dv_decoupling(cfg);

    // Independent oracle: dense 4x4 evaluation with the same per-sample draws.
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const Matrix rho_bell = bell * bell.adjoint();
    for (int k = 0; k < cfg.samples; ++k) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(k));
        const Matrix u = haar_unitary(2, rng).matrix;
        Matrix big = Matrix::Zero(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) big.block(i * 2, j * 2, 2, 2) = (i == j ? 1.0 : 0.0) * u;
        const Matrix conj = big * rho_bell * big.adjoint();
        Eigen::SelfAdjointEigenSolver<Matrix> es(conj - Matrix::Identity(4, 4) / 4.0,
                                                 Eigen::EigenvaluesOnly);
        const double expected = es.eigenvalues().cwiseAbs().sum();
        CHECK(std::abs(result.per_sample_distances[static_cast<std::size_t>(k)] - expected) <
              1e-12);
    }
}

TEST_CASE("dv: mean distance sits under the exact bound") {
    DvExperimentConfig cfg;
    cfg.n_systems = 6;
    cfg.k_pairs = 1;
    cfg.erased_count = 2;
    cfg.samples = 200;
    cfg.seed = 11;
    const auto result = run_dv_decoupling(cfg);
    CHECK(result.bound_exact == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(result.mean <= result.bound_exact + 2.0 * result.std_error);
    // For DV the dimension-ratio bound and the exact bound coincide.
    CHECK(result.bound_asymptotic == doctest::Approx(result.bound_exact));
    CHECK(result.gamma == doctest::Approx(1.0 / 6.0));
    CHECK(result.q_capacity == doctest::Approx(1.0 - 2.0 / 3.0));
}

TEST_CASE("dv: reruns and thread counts do not change the samples") {
    DvExperimentConfig cfg;
    cfg.n_systems = 4;
    cfg.k_pairs = 2;
    cfg.erased_count = 1;
    cfg.samples = 16;
    cfg.seed = 123;
    const auto a = run_dv_decoupling(cfg);
    const auto b = run_dv_decoupling(cfg);
    cfg.threads = 4;
    const auto c = run_dv_decoupling(cfg);
    CHECK(a.per_sample_distances == b.per_sample_distances);
    CHECK(a.per_sample_distances == c.per_sample_distances);
}

TEST_CASE("dv: erasing more makes decoupling harder") {
    DvExperimentConfig cfg;
    cfg.n_systems = 5;
    cfg.k_pairs = 1;
    cfg.samples = 100;
    cfg.seed = 9;
    double previous_mean = 0.0;
    double previous_se = 0.0;
    for (int erased : {1, 2, 3}) {
        cfg.erased_count = erased;
        const auto result = run_dv_decoupling(cfg);
        CHECK(result.mean + 2.0 * std::sqrt(result.std_error * result.std_error +
                                            previous_se * previous_se) >=
              previous_mean);
        previous_mean = result.mean;
        previous_se = result.std_error;
    }
}

TEST_CASE("dv: config validation") {
    DvExperimentConfig cfg;
    cfg.k_pairs = 5;
    cfg.n_systems = 3;
    CHECK_THROWS_AS(run_dv_decoupling(cfg), std::invalid_argument);
    cfg.k_pairs = 1;
    cfg.erased_count = 7;
    CHECK_THROWS_AS(run_dv_decoupling(cfg), std::invalid_argument);
    cfg.erased_count = 1;
    cfg.local_dim = 2;
    cfg.n_systems = 40; // 2^40 blows the dense limit
    CHECK_THROWS_AS(run_dv_decoupling(cfg), std::invalid_argument);
}

TEST_CASE("cv: no squeezing leaves nothing to scramble") {
    CvExperimentConfig cfg;
    cfg.n_modes = 2;
    cfg.k_pairs = 1;
    cfg.r = 0.0;
    cfg.total_photon_cutoff = 3;
    cfg.erased_count = 1;
    cfg.samples = 10;
    cfg.seed = 3;
    const auto result = run_cv_decoupling(cfg);
    for (double d : result.per_sample_distances) CHECK(d < 1e-10);
    CHECK(result.captured_probability == doctest::Approx(1.0));
}

TEST_CASE("cv: small run respects the exact bound and is reproducible") {
    CvExperimentConfig cfg;
    cfg.n_modes = 2;
    cfg.k_pairs = 1;
    cfg.r = std::asinh(1.0);
    cfg.total_photon_cutoff = 4;
    cfg.delta = 16.0; // typical set = every supported string
    cfg.erased_count = 1;
    cfg.samples = 100;
    cfg.seed = 21;
    const auto result = run_cv_decoupling(cfg);
    CHECK(result.mean <= result.bound_exact + 2.0 * result.std_error);
    CHECK(result.typical_dim == 15); // full register of 2 modes, <= 4 photons
    CHECK_FALSE(result.warnings.empty()); // captured mass 0.969 < 0.99 at this cutoff

    const auto rerun = run_cv_decoupling(cfg);
    CHECK(result.per_sample_distances == rerun.per_sample_distances);
    CvExperimentConfig threaded = cfg;
    threaded.threads = 3;
    const auto parallel = run_cv_decoupling(threaded);
    CHECK(result.per_sample_distances == parallel.per_sample_distances);
}

TEST_CASE("cv: asymptotic bound follows the closed form") {
    CvExperimentConfig cfg;
    cfg.n_modes = 2;
    cfg.k_pairs = 1;
    cfg.r = std::asinh(1.0);
    cfg.total_photon_cutoff = 4;
    cfg.erased_count = 1;
    cfg.samples = 4;
    cfg.seed = 2;
    const auto result = run_cv_decoupling(cfg);
    const double e_r = tmss_entanglement(cfg.r);
    const double e_r0 = tmss_entanglement(r0_from(1, 2, cfg.r));
    CHECK(std::abs(result.bound_asymptotic - std::exp2(0.5 * e_r - (0.5 - 0.5) * 2.0 * e_r0)) <
          1e-12);
    CHECK(result.gamma == doctest::Approx(e_r / 2.0));
}

TEST_CASE("cv: scrambling improves with more modes") {
    CvExperimentConfig base;
    base.k_pairs = 1;
    base.r = std::asinh(1.0);
    base.total_photon_cutoff = 4;
    base.erased_count = 1;
    base.samples = 100;
    base.seed = 31;

    CvExperimentConfig two = base;
    two.n_modes = 2;
    CvExperimentConfig three = base;
    three.n_modes = 3;
    const auto r2 = run_cv_decoupling(two);
    const auto r3 = run_cv_decoupling(three);
    CHECK(r3.mean <= r2.mean + combined_2se(r2, r3));
}

TEST_CASE("cv: analytic-thermal marginal mode works and stays bounded") {
    CvExperimentConfig cfg;
    cfg.n_modes = 2;
    cfg.k_pairs = 1;
    cfg.r = std::asinh(1.0);
    cfg.total_photon_cutoff = 4;
    cfg.erased_count = 1;
    cfg.samples = 50;
    cfg.seed = 8;
    cfg.marginal_mode = MarginalMode::AnalyticThermal;
    const auto result = run_cv_decoupling(cfg);
    CHECK(result.mean <= result.bound_exact + 2.0 * result.std_error);
    // Base distribution is thermal(K sinh^2 r / N) here.
    const auto expected = thermal_probs(0.5, 4, true);
    for (std::size_t n = 0; n < expected.size(); ++n)
        CHECK(result.base_marginal[n] == doctest::Approx(expected[n]));
}

TEST_CASE("passive thermal check reproduces the closed forms") {
    const auto report = run_passive_thermal_check(1.0, 2, 40, 17);
    CHECK(report.p1 == doctest::Approx(0.25));
    CHECK(report.p1_over_n == doctest::Approx(0.125));
    CHECK(report.q1 == doctest::Approx(2.0 / 9.0));
    CHECK_FALSE(report.degenerate);
    CHECK(report.p1_over_n != report.q1);
    CHECK(report.max_offdiag_after_dephase < 1e-12);

    const auto degenerate = run_passive_thermal_check(0.0, 2, 2, 17);
    CHECK(degenerate.degenerate);
    CHECK(degenerate.p1 == doctest::Approx(0.0));
    CHECK(degenerate.q1 == doctest::Approx(0.0));
}

TEST_CASE("passive thermal: widening the circuit approaches the thermal marginal") {
    const auto narrow = run_passive_thermal_check(1.0, 2, 100, 19);
    const auto wide = run_passive_thermal_check(1.0, 4, 100, 19);
    const double slack = 2.0 * std::sqrt(narrow.std_error * narrow.std_error +
                                         wide.std_error * wide.std_error);
    CHECK(wide.mean_tv < narrow.mean_tv + slack);
}

TEST_CASE("thermal reduction: exact marginals against the counting oracle") {
    const auto two = run_thermal_reduction_check(2, 1);
    CHECK(two.sector_dim == 2);
    CHECK(two.marginal[0] == doctest::Approx(0.5));
    CHECK(two.marginal[1] == doctest::Approx(0.5));

    // Oracle: P(n_1 = k) = C(T-k+N-2, N-2) / C(T+N-1, N-1).
    const auto report = run_thermal_reduction_check(6, 6);
    auto binom = [](int n, int k) {
        double v = 1.0;
        for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
        return v;
    };
    for (int k = 0; k <= 6; ++k)
        CHECK(report.marginal[static_cast<std::size_t>(k)] ==
              doctest::Approx(binom(6 - k + 4, 4) / binom(11, 5)));

    // Single mode: the marginal is a point mass, far from thermal.
    const auto degenerate = run_thermal_reduction_check(1, 3);
    CHECK(degenerate.marginal[3] == doctest::Approx(1.0));
    CHECK(degenerate.tv_distance > 0.5);
}

TEST_CASE("thermal reduction: TV shrinks along N at one photon per mode") {
    double previous = 1.0;
    for (int n : {3, 6, 9}) {
        const auto report = run_thermal_reduction_check(n, n);
        CHECK(report.tv_distance < previous);
        previous = report.tv_distance;
    }
    CHECK(previous <= 0.1);
}

TEST_CASE("truncated comparison: thermal encoding wins at equal energy") {
    const auto two = run_truncated_comparison(2);
    CHECK(two.n_bar == doctest::Approx(0.5));
    CHECK(two.thermal_bits == doctest::Approx(1.5 * std::log2(1.5) + 0.5).epsilon(1e-9));
    CHECK(two.thermal_bits > two.uniform_bits);
    CHECK(two.thermal_wins);

    const auto three = run_truncated_comparison(3);
    CHECK(three.thermal_bits == doctest::Approx(2.0));
    CHECK(three.uniform_bits == doctest::Approx(std::log2(3.0)));
    CHECK(three.thermal_wins);

    CHECK(thermal_entropy(0.0) == doctest::Approx(0.0)); // the zero-energy limit
}

TEST_CASE("truncated comparison with paired decoupling runs") {
    const auto report = run_truncated_comparison(2, true, 13);
    CHECK(report.ran_decoupling);
    CHECK(report.dv_run.mean <= report.dv_run.bound_exact + 2.0 * report.dv_run.std_error);
    CHECK(report.cv_run.mean <= report.cv_run.bound_exact + 2.0 * report.cv_run.std_error);
}

} // TEST_SUITE
