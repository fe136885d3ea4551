#pragma once

#include "decoupler/decoupling_experiments.hpp"

#include <json.hpp>

#include <string>

namespace decoupler {

inline constexpr const char* kToolVersion = "decoupler 0.1.0";

/// Run provenance embedded in every output. The CSV header carries every
/// field except the timestamp, so reruns with the same config and seed are
/// byte-identical; the JSON summary carries the full manifest.
struct RunManifest {
    std::string command;
    std::string config_path;
    nlohmann::json resolved_config;
    std::uint64_t seed = 0;
    std::string csv_path;
    std::string json_path;
    std::string tool_version = kToolVersion;
    std::string timestamp;
};

std::string current_timestamp_utc();

/// JSON text with every float printed at 17 significant digits.
std::string dump_json_17sig(const nlohmann::json& value, int indent = -1);

enum class ResultFormat { Csv, Json };

/// CSV: '#'-prefixed manifest header (timestamp omitted), then
/// sample_index,distance rows. JSON: summary object with
/// {mean, std_error, bound_exact, bound_asymptotic, gamma, Q, typical_dim,
/// config, seed} plus run diagnostics and the full manifest.
std::string serialize_result(const ExperimentResult& result, const RunManifest& manifest,
                             ResultFormat format);

nlohmann::json result_summary_json(const ExperimentResult& result, const RunManifest& manifest);

/// Manifest header plus "sample_index,<column>" rows; the CSV shape shared by
/// every per-sample output.
std::string serialize_samples_csv(const RunManifest& manifest, const std::string& column,
                                  std::span<const double> values);

} // namespace decoupler
