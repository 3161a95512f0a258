#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qf/pipeline.hpp"

namespace qf::io {

namespace fs = std::filesystem;

inline constexpr int kBackendSchema = 1;
inline constexpr int kPoolSchema = 1;
inline constexpr int kSampleSchema = 1;
inline constexpr int kErrorMapSchema = 1;
inline constexpr int kReportSchema = 1;
inline constexpr int kManifestSchema = 1;
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

// Byte-level helpers. Failures raise SchemaError so the CLI maps them to exit code 3.
std::string read_file(const fs::path& p);
void write_file(const fs::path& p, const std::string& bytes);
std::string sha256_hex(const std::string& bytes);
json read_json(const fs::path& p);
/// Pretty-printed with a trailing newline; key order is sorted, so output is canonical.
void write_json(const fs::path& p, const json& j);

// Schema conversions. Every from_json validates and throws SchemaError on malformed input.
json to_json(const ErrorMap& m);  // NaN sentinels are written as null
ErrorMap error_map_from_json(const json& j);

json to_json(const CouplingGraph& g);
CouplingGraph graph_from_json(const json& j);

json to_json(const BackendSpec& b);
BackendSpec backend_from_json(const json& j);

json to_json(const CalibrationTable& t);
CalibrationTable calibration_from_json(const json& j);

json to_json(const Circuit& c);
Circuit circuit_from_json(const json& j);

json to_json(const TranspiledCircuit& t);
TranspiledCircuit transpiled_from_json(const json& j);

/// Header line followed by one line per circuit.
std::string pool_to_jsonl(const CircuitPool& pool);
CircuitPool pool_from_jsonl(const std::string& text);
std::string transpiled_pool_to_jsonl(const PoolMeta& meta, std::span<const TranspiledCircuit> tpool);
std::vector<TranspiledCircuit> transpiled_pool_from_jsonl(const std::string& text, PoolMeta* meta = nullptr);

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

/// Self-contained: embeds the coupling graph so a sample can be loaded without its backend file.
json to_json(const GraphSample& s);
GraphSample sample_from_json(const json& j);

json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const json& j);

json to_json(const LinearCalibration& c);
LinearCalibration linear_calibration_from_json(const json& j);

json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const json& j);

RegressorConfig regressor_config_from_json(const json& j);
TrainConfig train_config_from_json(const json& j);

json to_json(const ComponentReport& r);
json to_json(const EvalReport& r);

/// One row per metric per component class.
std::string report_csv(const EvalReport& r);
std::string ablation_csv(const std::string& setting_name, std::span<const AblationRow> rows);

/**
 * Manifest of an output directory: tool/schema versions, seeds, configuration and a
 * SHA-256 digest of every regular file in `dir` except the manifest itself, in sorted
 * path order. No wall-clock data is stored, so reruns give identical bytes.
 */
json make_manifest(const fs::path& dir, const std::string& command, const json& params, const json& inputs);
void write_manifest(const fs::path& dir, const std::string& command, const json& params, const json& inputs);
/// Names of files whose digest differs from, or is missing in, the manifest (empty = verified).
std::vector<std::string> verify_manifest(const fs::path& dir);
/// Digest map {path as given: sha256} for a set of input files.
json digest_inputs(std::span<const fs::path> files);

}  // namespace qf::io
