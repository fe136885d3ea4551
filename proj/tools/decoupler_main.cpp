#include "decoupler/decoupling_experiments.hpp"
#include "decoupler/serialize.hpp"
#include "decoupler/twirl_calculus.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using nlohmann::json;

namespace {

// Exit codes: 0 success, 1 runtime failure, 2 config validation failure,
// 3 run completed but the advertised inequality check failed.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInequality = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_config_file(const std::string& path, const std::string& command) {
    std::ifstream in(path);
    if (!in) throw ConfigError(command + ": cannot open config file '" + path + "'");
    json config;
    try {
        in >> config;
    } catch (const json::parse_error& err) {
        throw ConfigError(command + ": config file '" + path + "' is not valid JSON: " + err.what());
    }
    if (!config.is_object()) throw ConfigError(command + ": config root must be a JSON object");
    return config;
}

void reject_unknown_keys(const json& config, const std::string& command,
                         std::initializer_list<const char*> allowed) {
    for (auto it = config.begin(); it != config.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) known = true;
        if (!known) throw ConfigError(command + "." + it.key() + ": unknown config field");
    }
}

template <typename T>
T field_or(const json& config, const std::string& command, const std::string& key, T fallback) {
    if (!config.contains(key)) return fallback;
    try {
        return config.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(command + "." + key + ": wrong type");
    }
}

void require_range(bool ok, const std::string& command, const std::string& key,
                   const std::string& what) {
    if (!ok) throw ConfigError(command + "." + key + ": " + what);
}

std::uint64_t env_seed_default() {
    if (const char* env = std::getenv("DECOUPLER_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

int env_threads_default() {
    if (const char* env = std::getenv("DECOUPLER_THREADS")) {
        const long value = std::strtol(env, nullptr, 10);
        if (value >= 1) return static_cast<int>(value);
    }
    return 1;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << contents;
}

void emit_outputs(const decoupler::ExperimentResult& result, decoupler::RunManifest& manifest) {
    manifest.timestamp = decoupler::current_timestamp_utc();
    if (!manifest.csv_path.empty())
        write_file(manifest.csv_path,
                   serialize_result(result, manifest, decoupler::ResultFormat::Csv));
    const std::string summary =
        serialize_result(result, manifest, decoupler::ResultFormat::Json);
    if (!manifest.json_path.empty()) write_file(manifest.json_path, summary);
    std::cout << summary;
}

void write_report(const json& report, decoupler::RunManifest& manifest) {
    manifest.timestamp = decoupler::current_timestamp_utc();
    json full = report;
    full["manifest"] = {{"command", manifest.command},
                        {"config_path", manifest.config_path},
                        {"seed", manifest.seed},
                        {"out_csv", manifest.csv_path},
                        {"out_json", manifest.json_path},
                        {"tool_version", manifest.tool_version},
                        {"timestamp", manifest.timestamp}};
    full["config"] = manifest.resolved_config;
    const std::string text = decoupler::dump_json_17sig(full, 2) + "\n";
    if (!manifest.json_path.empty()) write_file(manifest.json_path, text);
    std::cout << text;
}

// Common CLI plumbing per subcommand: optional config file, output paths,
// seed/threads resolution (flag > file > environment > default).
struct CommonOptions {
    std::string config_path;
    std::string out_csv;
    std::string out_json;
    std::uint64_t seed = 0;
    int threads = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;

    void attach(CLI::App* app, bool with_csv = true) {
        app->add_option("--config", config_path, "JSON config file");
        if (with_csv) app->add_option("--out-csv", out_csv, "per-sample CSV output path");
        app->add_option("--out-json", out_json, "JSON summary output path");
        seed_opt = app->add_option("--seed", seed, "RNG seed (overrides config and env)");
        threads_opt = app->add_option("--threads", threads, "worker threads");
    }

    json load(const std::string& command) const {
        return config_path.empty() ? json::object() : load_config_file(config_path, command);
    }

    std::uint64_t resolve_seed(const json& config, const std::string& command) const {
        if (seed_opt && seed_opt->count() > 0) return seed;
        if (config.contains("seed")) return field_or<std::uint64_t>(config, command, "seed", 0);
        return env_seed_default();
    }

    int resolve_threads(const json& config, const std::string& command) const {
        int value = env_threads_default();
        if (config.contains("threads")) value = field_or<int>(config, command, "threads", 1);
        if (threads_opt && threads_opt->count() > 0) value = threads;
        require_range(value >= 1, command, "threads", "must be >= 1");
        return value;
    }
};

template <typename T>
void override_if_set(CLI::Option* opt, json& config, const std::string& key, const T& value) {
    if (opt && opt->count() > 0) config[key] = value;
}

int finish_experiment(const decoupler::ExperimentResult& result, decoupler::RunManifest manifest) {
    emit_outputs(result, manifest);
    for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
    const bool within = result.mean <= result.bound_exact + 2.0 * result.std_error;
    if (!within) {
        std::cerr << "inequality violated: mean " << result.mean << " > bound "
                  << result.bound_exact << " + 2 s.e.\n";
        return kExitInequality;
    }
    return kExitOk;
}

// ---- decouple-dv -----------------------------------------------------------

struct DvCli {
    CommonOptions common;
    std::int64_t local_dim = 0;
    int n_systems = 0;
    int k_pairs = 0;
    int erased = -1;
    int samples = 0;
    CLI::Option *o_q = nullptr, *o_n = nullptr, *o_k = nullptr, *o_e = nullptr, *o_m = nullptr;
};

int run_dv_command(const DvCli& cli) {
    const std::string command = "decouple-dv";
    json config = cli.common.load(command);
    reject_unknown_keys(config, command,
                        {"local_dim", "n_systems", "k_pairs", "erased_count", "samples", "seed",
                         "threads"});
    override_if_set(cli.o_q, config, "local_dim", cli.local_dim);
    override_if_set(cli.o_n, config, "n_systems", cli.n_systems);
    override_if_set(cli.o_k, config, "k_pairs", cli.k_pairs);
    override_if_set(cli.o_e, config, "erased_count", cli.erased);
    override_if_set(cli.o_m, config, "samples", cli.samples);

    decoupler::DvExperimentConfig cfg;
    cfg.local_dim = field_or<std::int64_t>(config, command, "local_dim", 2);
    cfg.n_systems = field_or<int>(config, command, "n_systems", 4);
    cfg.k_pairs = field_or<int>(config, command, "k_pairs", 1);
    cfg.erased_count = field_or<int>(config, command, "erased_count", 1);
    cfg.samples = field_or<int>(config, command, "samples", 200);
    cfg.seed = cli.common.resolve_seed(config, command);
    cfg.threads = cli.common.resolve_threads(config, command);
    require_range(cfg.local_dim >= 2, command, "local_dim", "must be >= 2");
    require_range(cfg.n_systems >= 1, command, "n_systems", "must be >= 1");
    require_range(cfg.k_pairs >= 1 && cfg.k_pairs <= cfg.n_systems, command, "k_pairs",
                  "must satisfy 1 <= K <= N");
    require_range(cfg.erased_count >= 0 && cfg.erased_count <= cfg.n_systems, command,
                  "erased_count", "must satisfy 0 <= erased <= N");
    require_range(cfg.samples >= 1, command, "samples", "must be >= 1");

    decoupler::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = cli.common.config_path;
    manifest.seed = cfg.seed;
    manifest.csv_path = cli.common.out_csv;
    manifest.json_path = cli.common.out_json;
    manifest.resolved_config = {{"local_dim", cfg.local_dim},   {"n_systems", cfg.n_systems},
                                {"k_pairs", cfg.k_pairs},       {"erased_count", cfg.erased_count},
                                {"samples", cfg.samples},       {"seed", cfg.seed},
                                {"threads", cfg.threads}};
    return finish_experiment(decoupler::run_dv_decoupling(cfg), std::move(manifest));
}

// ---- decouple-cv -----------------------------------------------------------

struct CvCli {
    CommonOptions common;
    int n_modes = 0;
    int k_pairs = 0;
    double r = -1.0;
    int cutoff = 0;
    double delta = -1.0;
    int erased = -1;
    int samples = 0;
    std::string marginal_mode;
    CLI::Option *o_n = nullptr, *o_k = nullptr, *o_r = nullptr, *o_c = nullptr, *o_d = nullptr,
                *o_e = nullptr, *o_m = nullptr, *o_mm = nullptr;
};

int run_cv_command(const CvCli& cli) {
    const std::string command = "decouple-cv";
    json config = cli.common.load(command);
    reject_unknown_keys(config, command,
                        {"n_modes", "k_pairs", "r", "total_photon_cutoff", "delta", "erased_count",
                         "samples", "seed", "threads", "marginal_mode"});
    override_if_set(cli.o_n, config, "n_modes", cli.n_modes);
    override_if_set(cli.o_k, config, "k_pairs", cli.k_pairs);
    override_if_set(cli.o_r, config, "r", cli.r);
    override_if_set(cli.o_c, config, "total_photon_cutoff", cli.cutoff);
    override_if_set(cli.o_d, config, "delta", cli.delta);
    override_if_set(cli.o_e, config, "erased_count", cli.erased);
    override_if_set(cli.o_m, config, "samples", cli.samples);
    override_if_set(cli.o_mm, config, "marginal_mode", cli.marginal_mode);

    decoupler::CvExperimentConfig cfg;
    cfg.n_modes = field_or<int>(config, command, "n_modes", 3);
    cfg.k_pairs = field_or<int>(config, command, "k_pairs", 1);
    cfg.r = field_or<double>(config, command, "r", cfg.r);
    cfg.total_photon_cutoff = field_or<int>(config, command, "total_photon_cutoff", 4);
    cfg.delta = field_or<double>(config, command, "delta", 16.0);
    cfg.erased_count = field_or<int>(config, command, "erased_count", 1);
    cfg.samples = field_or<int>(config, command, "samples", 200);
    cfg.seed = cli.common.resolve_seed(config, command);
    cfg.threads = cli.common.resolve_threads(config, command);
    const std::string mode = field_or<std::string>(config, command, "marginal_mode", "empirical");
    if (mode == "empirical") {
        cfg.marginal_mode = decoupler::MarginalMode::Empirical;
    } else if (mode == "analytic_thermal") {
        cfg.marginal_mode = decoupler::MarginalMode::AnalyticThermal;
    } else {
        throw ConfigError(command + ".marginal_mode: must be 'empirical' or 'analytic_thermal'");
    }
    require_range(cfg.n_modes >= 1, command, "n_modes", "must be >= 1");
    require_range(cfg.k_pairs >= 1 && cfg.k_pairs <= cfg.n_modes, command, "k_pairs",
                  "must satisfy 1 <= K <= N");
    require_range(cfg.r >= 0.0, command, "r", "must be >= 0");
    require_range(cfg.total_photon_cutoff >= 0, command, "total_photon_cutoff", "must be >= 0");
    require_range(cfg.delta >= 0.0, command, "delta", "must be >= 0");
    require_range(cfg.erased_count >= 0 && cfg.erased_count <= cfg.n_modes, command,
                  "erased_count", "must satisfy 0 <= erased <= N");
    require_range(cfg.samples >= 1, command, "samples", "must be >= 1");

    decoupler::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = cli.common.config_path;
    manifest.seed = cfg.seed;
    manifest.csv_path = cli.common.out_csv;
    manifest.json_path = cli.common.out_json;
    manifest.resolved_config = {{"n_modes", cfg.n_modes},
                                {"k_pairs", cfg.k_pairs},
                                {"r", cfg.r},
                                {"total_photon_cutoff", cfg.total_photon_cutoff},
                                {"delta", cfg.delta},
                                {"erased_count", cfg.erased_count},
                                {"samples", cfg.samples},
                                {"seed", cfg.seed},
                                {"threads", cfg.threads},
                                {"marginal_mode", mode}};
    return finish_experiment(decoupler::run_cv_decoupling(cfg), std::move(manifest));
}

// ---- twirl-check -----------------------------------------------------------

int run_twirl_command(const CommonOptions& common, std::int64_t d, int samples,
                      CLI::Option* o_d, CLI::Option* o_samples) {
    const std::string command = "twirl-check";
    json config = common.load(command);
    reject_unknown_keys(config, command, {"d", "samples", "seed"});
    override_if_set(o_d, config, "d", d);
    override_if_set(o_samples, config, "samples", samples);
    const std::int64_t dim = field_or<std::int64_t>(config, command, "d", 3);
    const int m = field_or<int>(config, command, "samples", 3000);
    const std::uint64_t seed = common.resolve_seed(config, command);
    require_range(dim >= 2, command, "d", "must be >= 2");
    require_range(m >= 10, command, "samples", "must be >= 10");

    using namespace decoupler;
    bool all_within = true;
    json report;

    // Single twirl: Monte Carlo around I/d.
    {
        RngStream state_rng(seed, 10'000'000);
        const DensityOperator rho = [&] {
            Matrix g(dim, dim);
            for (std::int64_t i = 0; i < dim; ++i)
                for (std::int64_t j = 0; j < dim; ++j) g(i, j) = state_rng.complex_normal();
            Matrix mat = g * g.adjoint();
            mat /= mat.trace().real();
            return make_density(std::move(mat), HilbertSpec({dim}));
        }();
        RngStream rng(seed, 0);
        const Matrix mc = twirl_single_mc(rho, m, rng);
        report["single_twirl_trace_distance"] = trace_norm(mc - twirl_single(rho).matrix);
    }

    // Double twirl: elementwise agreement at the 1/sqrt(m) scale.
    {
        RngStream xrng(seed, 10'000'001);
        Matrix g(dim * dim, dim * dim);
        for (std::int64_t i = 0; i < dim * dim; ++i)
            for (std::int64_t j = 0; j < dim * dim; ++j) g(i, j) = xrng.complex_normal();
        const Matrix x = 0.5 * (g + g.adjoint());
        RngStream rng(seed, 1);
        const Matrix mc = twirl_double_mc(x, m, rng);
        const double max_delta = (mc - twirl_double(x)).cwiseAbs().maxCoeff();
        const double scale = hs_norm(x) / std::sqrt(static_cast<double>(m));
        report["double_twirl_max_delta"] = max_delta;
        report["double_twirl_3se_scale"] = 3.0 * scale;
        if (max_delta > 3.0 * scale) all_within = false;
    }

    // Haar moments against the Weingarten values.
    {
        RngStream rng(seed, 2);
        double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
        for (int k = 0; k < m; ++k) {
            const Matrix u = haar_unitary(dim, rng).matrix;
            const double x = std::norm(u(0, 0));
            s1 += x;
            s1sq += x * x;
            s2 += x * x;
            s2sq += x * x * x * x;
        }
        const double dd = static_cast<double>(dim);
        auto record = [&](const char* name, double sum, double sumsq, double exact) {
            const double mean = sum / m;
            const double se = std::sqrt(std::max(0.0, sumsq / m - mean * mean) / m);
            report[name] = {{"mean", mean}, {"exact", exact}, {"std_error", se}};
            if (std::abs(mean - exact) > 3.0 * se + 1e-12) all_within = false;
        };
        record("haar_moment_2", s1, s1sq, 1.0 / dd);
        record("haar_moment_4", s2, s2sq, 2.0 / (dd * (dd + 1.0)));
    }

    report["all_within_3se"] = all_within;

    decoupler::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = common.config_path;
    manifest.seed = seed;
    manifest.json_path = common.out_json;
    manifest.resolved_config = {{"d", dim}, {"samples", m}, {"seed", seed}};
    write_report(report, manifest);
    return all_within ? kExitOk : kExitInequality;
}

// ---- remaining commands ----------------------------------------------------

int run_passive_thermal_command(const CommonOptions& common, double n_bar, int modes, int samples,
                                int cutoff, CLI::Option* o_nbar, CLI::Option* o_modes,
                                CLI::Option* o_samples, CLI::Option* o_cutoff) {
    const std::string command = "passive-thermal";
    json config = common.load(command);
    reject_unknown_keys(config, command, {"n_bar", "n_modes", "samples", "cutoff", "seed"});
    override_if_set(o_nbar, config, "n_bar", n_bar);
    override_if_set(o_modes, config, "n_modes", modes);
    override_if_set(o_samples, config, "samples", samples);
    override_if_set(o_cutoff, config, "cutoff", cutoff);
    const double nb = field_or<double>(config, command, "n_bar", 1.0);
    const int n = field_or<int>(config, command, "n_modes", 2);
    const int m = field_or<int>(config, command, "samples", 100);
    const int cap = field_or<int>(config, command, "cutoff", 10);
    const std::uint64_t seed = common.resolve_seed(config, command);
    require_range(nb >= 0.0, command, "n_bar", "must be >= 0");
    require_range(n >= 2, command, "n_modes", "must be >= 2");
    require_range(m >= 1, command, "samples", "must be >= 1");
    require_range(cap >= 1, command, "cutoff", "must be >= 1");

    const auto rep = decoupler::run_passive_thermal_check(nb, n, m, seed, cap);
    json report = {{"p1", rep.p1},
                   {"q1", rep.q1},
                   {"p1_over_n", rep.p1_over_n},
                   {"degenerate", rep.degenerate},
                   {"averages_differ", !rep.degenerate && rep.p1_over_n != rep.q1},
                   {"mean_tv", rep.mean_tv},
                   {"std_error", rep.std_error},
                   {"max_offdiag_after_dephase", rep.max_offdiag_after_dephase}};

    decoupler::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = common.config_path;
    manifest.seed = seed;
    manifest.csv_path = common.out_csv;
    manifest.json_path = common.out_json;
    manifest.resolved_config = {
        {"n_bar", nb}, {"n_modes", n}, {"samples", m}, {"cutoff", cap}, {"seed", seed}};
    if (!common.out_csv.empty()) {
        manifest.timestamp = decoupler::current_timestamp_utc();
        write_file(common.out_csv,
                   decoupler::serialize_samples_csv(manifest, "tv_distance", rep.per_sample_tv));
    }
    write_report(report, manifest);
    return kExitOk;
}

int run_thermal_reduction_command(const CommonOptions& common, int modes, int total,
                                  CLI::Option* o_modes, CLI::Option* o_total) {
    const std::string command = "thermal-reduction";
    json config = common.load(command);
    reject_unknown_keys(config, command, {"n_modes", "total_photons", "seed"});
    override_if_set(o_modes, config, "n_modes", modes);
    override_if_set(o_total, config, "total_photons", total);
    const int n = field_or<int>(config, command, "n_modes", 9);
    const int t = field_or<int>(config, command, "total_photons", n);
    const std::uint64_t seed = common.resolve_seed(config, command);
    require_range(n >= 1, command, "n_modes", "must be >= 1");
    require_range(t >= 0, command, "total_photons", "must be >= 0");

    const auto rep = decoupler::run_thermal_reduction_check(n, t, seed);
    json report = {{"n_modes", rep.n_modes},
                   {"total_photons", rep.total_photons},
                   {"sector_dim", rep.sector_dim},
                   {"tv_distance", rep.tv_distance},
                   {"marginal", rep.marginal},
                   {"thermal_reference", rep.thermal_reference}};
    decoupler::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = common.config_path;
    manifest.seed = seed;
    manifest.json_path = common.out_json;
    manifest.resolved_config = {{"n_modes", n}, {"total_photons", t}, {"seed", seed}};
    write_report(report, manifest);
    return kExitOk;
}

int run_truncated_compare_command(const CommonOptions& common, std::int64_t n_c,
                                  bool with_decoupling, CLI::Option* o_nc) {
    const std::string command = "truncated-compare";
    json config = common.load(command);
    reject_unknown_keys(config, command, {"n_c", "run_decoupling", "seed"});
    override_if_set(o_nc, config, "n_c", n_c);
    const std::int64_t nc = field_or<std::int64_t>(config, command, "n_c", 3);
    const bool run_dec =
        with_decoupling || field_or<bool>(config, command, "run_decoupling", false);
    const std::uint64_t seed = common.resolve_seed(config, command);
    require_range(nc >= 2, command, "n_c", "must be >= 2");

    const auto rep = decoupler::run_truncated_comparison(nc, run_dec, seed);
    json report = {{"n_c", rep.n_c},
                   {"n_bar", rep.n_bar},
                   {"uniform_bits", rep.uniform_bits},
                   {"thermal_bits", rep.thermal_bits},
                   {"thermal_wins", rep.thermal_wins}};
    if (rep.ran_decoupling) {
        report["dv_run"] = {{"mean", rep.dv_run.mean},
                            {"std_error", rep.dv_run.std_error},
                            {"bound_exact", rep.dv_run.bound_exact}};
        report["cv_run"] = {{"mean", rep.cv_run.mean},
                            {"std_error", rep.cv_run.std_error},
                            {"bound_exact", rep.cv_run.bound_exact}};
    }
    decoupler::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = common.config_path;
    manifest.seed = seed;
    manifest.json_path = common.out_json;
    manifest.resolved_config = {{"n_c", nc}, {"run_decoupling", run_dec}, {"seed", seed}};
    write_report(report, manifest);
    return rep.thermal_wins ? kExitOk : kExitInequality;
}

int run_capacity_command(double p, std::int64_t d, double r0, CLI::Option* o_d,
                         CLI::Option* o_r0) {
    const std::string command = "capacity";
    require_range(p >= 0.0 && p <= 1.0, command, "p", "must lie in [0,1]");
    if (o_d->count() == 0 && o_r0->count() == 0)
        throw ConfigError(command + ": provide --d (DV) and/or --r0 (CV)");
    if (o_d->count() > 0) {
        require_range(d >= 2, command, "d", "must be >= 2");
        std::cout << decoupler::dv_capacity(p, d) << "\n";
    }
    if (o_r0->count() > 0) {
        require_range(r0 >= 0.0, command, "r0", "must be >= 0");
        std::cout << decoupler::cv_capacity(p, r0).bits << "\n";
    }
    return kExitOk;
}

int run_decode_demo_command(const CommonOptions& common, std::int64_t d_r, std::int64_t d_b,
                            std::int64_t d_e, int count, bool non_decoupled) {
    const std::string command = "decode-demo";
    json config = common.load(command);
    reject_unknown_keys(config, command, {"seed"});
    const std::uint64_t seed = common.resolve_seed(config, command);
    require_range(d_r >= 1 && d_b >= 1 && d_e >= 1, command, "dims", "must be >= 1");
    require_range(d_b >= d_r * d_e, command, "d_b", "must be >= d_r * d_e");
    require_range(count >= 1, command, "count", "must be >= 1");

    using namespace decoupler;
    json report;
    double min_fidelity = 1.0;
    for (int trial = 0; trial < count; ++trial) {
        RngStream rng(seed, static_cast<std::uint64_t>(trial));
        const PureState psi = random_decoupled_state(d_r, d_b, d_e, rng);
        const auto out = exact_decoder(psi);
        min_fidelity = std::min(min_fidelity, out.fidelity);
    }
    report["trials"] = count;
    report["min_fidelity"] = min_fidelity;

    if (non_decoupled) {
        Vector ghz = Vector::Zero(d_r * d_b * d_e);
        ghz(0) = 1.0 / std::sqrt(2.0);
        ghz((d_b + 1) * d_e + 1) = 1.0 / std::sqrt(2.0); // |1>_R |1>_B |1>_E
        const PureState psi = make_pure(ghz, HilbertSpec({d_r, d_b, d_e}));
        try {
            exact_decoder(psi);
            report["non_decoupled_rejected"] = false;
        } catch (const DecouplingViolationError& err) {
            report["non_decoupled_rejected"] = true;
            report["violation_norm"] = err.violation;
        }
    }

    decoupler::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = common.config_path;
    manifest.seed = seed;
    manifest.json_path = common.out_json;
    manifest.resolved_config = {{"d_r", d_r}, {"d_b", d_b},     {"d_e", d_e},
                                {"count", count}, {"seed", seed}, {"non_decoupled", non_decoupled}};
    write_report(report, manifest);
    return min_fidelity >= 1.0 - 1e-8 ? kExitOk : kExitInequality;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical decoupling experiments for discrete- and continuous-variable "
                 "erasure channels"};
    app.require_subcommand(1);

    DvCli dv;
    auto* dv_cmd = app.add_subcommand("decouple-dv", "Haar-scrambled qudit decoupling run");
    dv.common.attach(dv_cmd);
    dv.o_q = dv_cmd->add_option("--local-dim,-q", dv.local_dim, "qudit dimension");
    dv.o_n = dv_cmd->add_option("--n", dv.n_systems, "systems N");
    dv.o_k = dv_cmd->add_option("--k", dv.k_pairs, "entangled pairs K");
    dv.o_e = dv_cmd->add_option("--erased", dv.erased, "erased systems pN");
    dv.o_m = dv_cmd->add_option("--samples", dv.samples, "Monte Carlo samples");

    CvCli cv;
    auto* cv_cmd = app.add_subcommand("decouple-cv", "bosonic typical-subspace decoupling run");
    cv.common.attach(cv_cmd);
    cv.o_n = cv_cmd->add_option("--n", cv.n_modes, "modes N");
    cv.o_k = cv_cmd->add_option("--k", cv.k_pairs, "squeezed pairs K");
    cv.o_r = cv_cmd->add_option("--r", cv.r, "squeeze strength");
    cv.o_c = cv_cmd->add_option("--cutoff", cv.cutoff, "total photon cutoff");
    cv.o_d = cv_cmd->add_option("--delta", cv.delta, "typicality half-width (bits/mode)");
    cv.o_e = cv_cmd->add_option("--erased", cv.erased, "erased modes pN");
    cv.o_m = cv_cmd->add_option("--samples", cv.samples, "Monte Carlo samples");
    cv.o_mm = cv_cmd->add_option("--marginal-mode", cv.marginal_mode,
                                 "empirical | analytic_thermal");

    CommonOptions twirl_common;
    std::int64_t twirl_d = 3;
    int twirl_samples = 3000;
    auto* twirl_cmd = app.add_subcommand("twirl-check", "analytic vs Monte Carlo twirls");
    twirl_common.attach(twirl_cmd, false);
    auto* twirl_o_d = twirl_cmd->add_option("--d", twirl_d, "local dimension");
    auto* twirl_o_m = twirl_cmd->add_option("--samples", twirl_samples, "Monte Carlo samples");

    CommonOptions pt_common;
    double pt_nbar = 1.0;
    int pt_modes = 2, pt_samples = 100, pt_cutoff = 10;
    auto* pt_cmd = app.add_subcommand("passive-thermal",
                                      "passive circuits do not thermalize (Appendix check)");
    pt_common.attach(pt_cmd);
    auto* pt_o_nbar = pt_cmd->add_option("--nbar", pt_nbar, "input thermal photon number");
    auto* pt_o_modes = pt_cmd->add_option("--modes", pt_modes, "modes N");
    auto* pt_o_samples = pt_cmd->add_option("--samples", pt_samples, "Monte Carlo samples");
    auto* pt_o_cutoff = pt_cmd->add_option("--photon-cutoff", pt_cutoff, "total photon cutoff");

    CommonOptions tr_common;
    int tr_modes = 9, tr_total = -1;
    auto* tr_cmd = app.add_subcommand("thermal-reduction",
                                      "micro-canonical single-mode reduction is thermal");
    tr_common.attach(tr_cmd, false);
    auto* tr_o_modes = tr_cmd->add_option("--modes", tr_modes, "modes N");
    auto* tr_o_total = tr_cmd->add_option("--total-photons", tr_total, "fixed total photon number");

    CommonOptions tc_common;
    std::int64_t tc_nc = 3;
    bool tc_run = false;
    auto* tc_cmd = app.add_subcommand("truncated-compare",
                                      "truncated-Bell vs thermal encoding at equal energy");
    tc_common.attach(tc_cmd, false);
    auto* tc_o_nc = tc_cmd->add_option("--nc", tc_nc, "per-mode cutoff n_c");
    tc_cmd->add_flag("--run-decoupling", tc_run, "also run small paired decoupling experiments");

    double cap_p = 0.0, cap_r0 = 0.0;
    std::int64_t cap_d = 0;
    auto* cap_cmd = app.add_subcommand("capacity", "erasure channel capacity formulas");
    cap_cmd->add_option("--p", cap_p, "erasure probability")->required();
    auto* cap_o_d = cap_cmd->add_option("--d", cap_d, "DV input dimension");
    auto* cap_o_r0 = cap_cmd->add_option("--r0", cap_r0, "CV per-mode squeeze");

    CommonOptions dd_common;
    std::int64_t dd_r = 2, dd_b = 4, dd_e = 2;
    int dd_count = 50;
    bool dd_non = false;
    auto* dd_cmd = app.add_subcommand("decode-demo", "exact decoder on decoupled states");
    dd_common.attach(dd_cmd, false);
    dd_cmd->add_option("--dr", dd_r, "reference dimension");
    dd_cmd->add_option("--db", dd_b, "output dimension");
    dd_cmd->add_option("--de", dd_e, "environment dimension");
    dd_cmd->add_option("--count", dd_count, "number of random states");
    dd_cmd->add_flag("--non-decoupled", dd_non, "also feed a non-decoupled state");

    CLI11_PARSE(app, argc, argv);

    try {
        if (dv_cmd->parsed()) return run_dv_command(dv);
        if (cv_cmd->parsed()) return run_cv_command(cv);
        if (twirl_cmd->parsed())
            return run_twirl_command(twirl_common, twirl_d, twirl_samples, twirl_o_d, twirl_o_m);
        if (pt_cmd->parsed())
            return run_passive_thermal_command(pt_common, pt_nbar, pt_modes, pt_samples, pt_cutoff,
                                               pt_o_nbar, pt_o_modes, pt_o_samples, pt_o_cutoff);
        if (tr_cmd->parsed())
            return run_thermal_reduction_command(tr_common, tr_modes,
                                                 tr_total < 0 ? tr_modes : tr_total, tr_o_modes,
                                                 tr_o_total);
        if (tc_cmd->parsed()) return run_truncated_compare_command(tc_common, tc_nc, tc_run, tc_o_nc);
        if (cap_cmd->parsed()) return run_capacity_command(cap_p, cap_d, cap_r0, cap_o_d, cap_o_r0);
        if (dd_cmd->parsed())
            return run_decode_demo_command(dd_common, dd_r, dd_b, dd_e, dd_count, dd_non);
    } catch (const ConfigError& err) {
        std::cerr << "config error at " << err.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
