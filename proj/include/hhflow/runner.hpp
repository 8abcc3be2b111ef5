#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hhflow/config.hpp"

namespace hhflow {

/// Environment variable that replaces the output directory of every run.
inline constexpr const char* kOutputDirEnv = "HHFLOW_OUTPUT_DIR";

const char* code_version() noexcept;

/// Output directory precedence: explicit override, then $HHFLOW_OUTPUT_DIR,
/// then the configured directory, then `fallback`.
std::string resolve_output_dir(const std::string& override_dir, const std::string& configured,
                               const std::string& fallback);

/// Write to `path.tmp` and rename over `path`; creates parent directories.
void write_file_atomic(const std::string& path, const std::string& content);

struct EvolveSummary {
  std::string output_dir;
  std::size_t records = 0;
  double final_time = 0.0;
  double final_energy = 0.0;
  double wall_time = 0.0;
  std::string calibration_source;
};

/// Runs the configured flow and writes trajectory.csv, manifest.json and
/// snapshots/. On a solver failure the partial trajectory and a manifest with
/// the error are still written before the error is rethrown.
EvolveSummary run_evolve(const ExperimentConfig& cfg, const std::string& output_dir_override = "");

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

struct CheckReport {
  std::string suite;
  std::size_t M = 0;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  double wall_time = 0.0;

  bool passed() const;
  std::string to_json() const;
};

/// suite is one of identity, geometry, crossform. InvalidArgument otherwise.
CheckReport run_check(const std::string& suite, std::size_t M, std::uint64_t seed);

struct CalibrationEntry {
  double s = 0.5;
  std::size_t M = 0;
  double c_disc = 0.0;
  double c_dual = 0.0;
};

/// Computes C_disc and C_dual for every (s, M) pair and writes
/// calibration.json into the resolved output directory. Returns the table.
std::vector<CalibrationEntry> run_calibrate(const std::vector<double>& s, const std::vector<std::size_t>& M,
                                            const std::string& output_dir_override = "");

std::string calibration_json(const std::vector<CalibrationEntry>& table);
/// Io error when the file cannot be read, Config error when it is malformed.
std::vector<CalibrationEntry> read_calibration_file(const std::string& path);

}  // namespace hhflow
