#pragma once

// Experiment configuration: a JSON document, validated into diagnostics
// before anything runs.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlcb/confidence.hpp"
#include "mlcb/metrics.hpp"

namespace mlcb::harness {

using Json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;

struct Diagnostic {
  std::string field;  // JSON path, e.g. "/confidence/scale"
  std::string message;
};

std::string format(const Diagnostic& d);

struct ExperimentConfig {
  std::string name = "experiment";
  std::string preset;
  Json params = Json::object();
  /// Overrides applied to every expert spec of the preset.
  Json experts = Json::object();
  std::vector<Index> budgets{1};
  Round horizon = 1000;
  double delta = 0.1;
  std::vector<std::string> procedures{"m-lcb"};
  Scheme scheme = Scheme::Standard;
  double scale = 1.0;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir;
  CheckpointMode trace_mode = CheckpointMode::Compact;
  int per_decade = 20;
  int threads = 1;
  double gamma = 0.0;
};

const std::vector<std::string>& procedure_names();

/// Empty iff the document describes a runnable experiment.
std::vector<Diagnostic> validate_config(const Json& doc);

/// Parses a validated document; throws ConfigError listing all diagnostics.
ExperimentConfig parse_config(const Json& doc);

/// Reads a file; JSON syntax errors are reported with line and column.
Json read_config_file(const std::filesystem::path& path);

/// Fully resolved form (every default made explicit).
Json to_json(const ExperimentConfig& cfg);

/// Applies "a.b.c=<json value>" (bare words are taken as strings).
void apply_override(Json& doc, const std::string& assignment);

/// Default output directory: $MLCB_OUTPUT_ROOT/<name>, else runs/<name>.
std::filesystem::path default_output_dir(const std::string& name);

/// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace mlcb::harness
