#pragma once

// Batch jobs driven by JSON configs: parsing, execution, and the report and
// CSV files a run produces.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "momidx/errors.hpp"
#include "momidx/indexes.hpp"
#include "momidx/json_io.hpp"
#include "momidx/matrix_source.hpp"
#include "momidx/similarity.hpp"

namespace momidx {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

enum class Command { Indexes, Szego, Density, Bpe, Map, Transform, Moments };

std::string to_string(Command c);
/// Throws ConfigError("command", ...) for unknown names.
Command command_from_string(const std::string& name);

struct Tolerances {
  LimitConfig limits;
  QuadratureConfig quadrature;
  double pivot_tol = CholeskyFactor::kDefaultPivotTol;
  double audit_tol = 1e-9;
};

struct JobConfig {
  Command command = Command::Indexes;

  // Exactly one matrix source.
  std::optional<MeasureSpec> measure;
  std::optional<DensitySpec> toeplitz;
  std::optional<HermitianSection> matrix;
  /// File the explicit matrix came from, echoed instead of its entries.
  std::string matrix_path;

  std::size_t order = 0;
  std::optional<Complex> z0;
  Complex z_ref{0.0, 0.0};
  bool override_applicability = false;
  std::optional<GridSpec> grid;
  std::optional<AffineMap> map;
  Tolerances tolerances;
  bool crosscheck = false;
  std::string output_dir;

  MatrixOracle oracle() const;
  /// Normalized config with defaults filled, as echoed in the report.
  Json echo() const;
};

/// Validates a config document. `base_dir` resolves relative matrix paths.
JobConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
/// Reads a config file, or stdin for "-".
JobConfig load_config(const std::string& path);

struct RunOptions {
  std::optional<std::size_t> max_order;
  std::uint64_t seed = 0;
};

struct Report {
  Json document;
  /// File name -> contents, written next to report.json.
  std::map<std::string, std::string> files;
  int exit_code = 0;
};

/// Runs the job. Computation errors are caught and recorded in the report
/// with exit code 1; the timing field is the only nondeterministic part.
Report run(const JobConfig& config, const RunOptions& options = {});

/// Writes report.json and the side files into `dir` (created if missing).
void write_report(const Report& report, const std::filesystem::path& dir);

/// Report for a job that failed before it could run (bad config).
Report error_report(const std::string& command, const Error& error);

/// Report document without its timing field, for reproducibility checks.
Json without_timing(const Json& report);

std::string sequence_csv(const IndexSequence& s);

}  // namespace momidx
