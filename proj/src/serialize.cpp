#include "decoupler/serialize.hpp"

#include <cstdio>
#include <ctime>
#include <sstream>
#include <stdexcept>

namespace decoupler {

std::string current_timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

namespace {

std::string format_double(double x) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    return buffer;
}

void dump_value(const nlohmann::json& value, std::ostringstream& out, int indent, int depth) {
    const auto pad = [&](int d) {
        if (indent >= 0) {
            out << '\n';
            for (int i = 0; i < d * indent; ++i) out << ' ';
        }
    };
    switch (value.type()) {
        case nlohmann::json::value_t::number_float:
            out << format_double(value.get<double>());
            break;
        case nlohmann::json::value_t::array: {
            out << '[';
            bool first = true;
            for (const auto& item : value) {
                if (!first) out << ',';
                first = false;
                pad(depth + 1);
                dump_value(item, out, indent, depth + 1);
            }
            if (!value.empty()) pad(depth);
            out << ']';
            break;
        }
        case nlohmann::json::value_t::object: {
            out << '{';
            bool first = true;
            for (auto it = value.begin(); it != value.end(); ++it) {
                if (!first) out << ',';
                first = false;
                pad(depth + 1);
                out << nlohmann::json(it.key()).dump() << ':';
                if (indent >= 0) out << ' ';
                dump_value(it.value(), out, indent, depth + 1);
            }
            if (!value.empty()) pad(depth);
            out << '}';
            break;
        }
        default:
            out << value.dump();
            break;
    }
}

} // namespace

std::string dump_json_17sig(const nlohmann::json& value, int indent) {
    std::ostringstream out;
    dump_value(value, out, indent, 0);
    return out.str();
}

namespace {

std::string csv_header(const RunManifest& manifest) {
    std::ostringstream out;
    out << "# " << manifest.tool_version << "\n";
    out << "# command: " << manifest.command << "\n";
    out << "# config_path: " << manifest.config_path << "\n";
    out << "# seed: " << manifest.seed << "\n";
    out << "# out_csv: " << manifest.csv_path << "\n";
    out << "# out_json: " << manifest.json_path << "\n";
    out << "# config: " << dump_json_17sig(manifest.resolved_config) << "\n";
    return out.str();
}

} // namespace

nlohmann::json result_summary_json(const ExperimentResult& result, const RunManifest& manifest) {
    nlohmann::json summary;
    summary["mean"] = result.mean;
    summary["std_error"] = result.std_error;
    summary["bound_exact"] = result.bound_exact;
    summary["bound_asymptotic"] = result.bound_asymptotic;
    summary["gamma"] = result.gamma;
    summary["Q"] = result.q_capacity;
    summary["typical_dim"] = result.typical_dim;
    summary["config"] = manifest.resolved_config;
    summary["seed"] = result.seed;
    summary["samples"] = static_cast<std::int64_t>(result.per_sample_distances.size());
    summary["mean_within_bound"] = result.mean <= result.bound_exact + 2.0 * result.std_error;
    summary["d_r"] = result.d_r;
    summary["d_a1"] = result.d_a1;
    summary["d_a2"] = result.d_a2;
    summary["captured_probability"] = result.captured_probability;
    if (!result.base_marginal.empty()) summary["base_marginal"] = result.base_marginal;
    summary["warnings"] = result.warnings;
    summary["manifest"] = {{"command", manifest.command},
                           {"config_path", manifest.config_path},
                           {"seed", manifest.seed},
                           {"out_csv", manifest.csv_path},
                           {"out_json", manifest.json_path},
                           {"tool_version", manifest.tool_version},
                           {"timestamp", manifest.timestamp}};
    return summary;
}

std::string serialize_samples_csv(const RunManifest& manifest, const std::string& column,
                                  std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("serialize_samples_csv: empty sample list");
    std::ostringstream out;
    out << csv_header(manifest);
    out << "sample_index," << column << "\n";
    for (std::size_t k = 0; k < values.size(); ++k)
        out << k << ',' << format_double(values[k]) << "\n";
    return out.str();
}

std::string serialize_result(const ExperimentResult& result, const RunManifest& manifest,
                             ResultFormat format) {
    if (result.per_sample_distances.empty())
        throw std::invalid_argument("serialize_result: empty sample list");
    if (format == ResultFormat::Csv)
        return serialize_samples_csv(manifest, "distance", result.per_sample_distances);
    return dump_json_17sig(result_summary_json(result, manifest), 2) + "\n";
}

} // namespace decoupler
