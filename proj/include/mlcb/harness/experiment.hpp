#pragma once

// Fan-out of (procedure x M x seed) cells, per-cell CSV traces, and the
// merged summary/manifest documents.

#include <optional>
#include <string>
#include <vector>

#include "mlcb/harness/config.hpp"
#include "mlcb/harness/presets.hpp"
#include "mlcb/meta.hpp"

namespace mlcb::harness {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr int kSummarySchemaVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

std::string tool_version();

struct CellKey {
  std::string procedure;
  Index m = 1;
  std::uint64_t seed = 0;

  /// e.g. "m-lcb_M2_s17"; also the CSV run_id.
  std::string id() const;
  bool operator<(const CellKey& o) const;
};

/// Sorted by (procedure, M, seed).
std::vector<CellKey> enumerate_cells(const ExperimentConfig& cfg);

struct CellOutcome {
  CellKey key;
  RunResult result;
  std::string csv;
  std::optional<std::string> error;
};

/// Procedure instance for a cell. Throws ConfigError (e.g. oracle without a table).
std::unique_ptr<Procedure> make_procedure(const ExperimentConfig& cfg,
                                          const Scenario& sc, const CellKey& key);

/// Runs one cell. Never throws for run-time failures: they land in `error`.
CellOutcome run_cell(const ExperimentConfig& cfg, const Scenario& sc,
                     const CellKey& key, bool emit_csv = true,
                     bool keep_records = false);

struct ExecutionOptions {
  int threads = 1;
  bool write_files = true;
  bool keep_csv = true;
  bool keep_records = false;
};

struct ExperimentOutputs {
  std::vector<CellOutcome> cells;
  Json summary;
  Json manifest;
};

ExperimentOutputs run_experiment(const ExperimentConfig& cfg, const Scenario& sc,
                                 const ExecutionOptions& opts = {});

/// Header line (without newline) for K experts.
std::string csv_header(Index experts);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& raw);

/// Shortest round-trip form ("%.17g"); empty for NaN.
std::string csv_number(double v);

Json summarize(const ExperimentConfig& cfg, const Scenario& sc,
               const std::vector<CellOutcome>& cells);

Json make_manifest(const ExperimentConfig& cfg, const std::vector<CellOutcome>& cells);

}  // namespace mlcb::harness
