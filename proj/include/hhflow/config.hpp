#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hhflow/flow.hpp"
#include "hhflow/grid_function.hpp"
#include "hhflow/manifold.hpp"

namespace hhflow {

/// Experiment description read from a flat `key = value` file with dotted
/// keys. Lines starting with '#' and blank lines are ignored; lists are
/// comma separated. Unknown or repeated keys are Config errors.
struct ExperimentConfig {
  std::string name = "experiment";

  std::size_t M = 128;

  std::string manifold_type = "sphere";
  std::size_t dim = 3;
  std::vector<double> axes;
  double torus_R = 2.0;
  double torus_r = 0.5;
  std::vector<double> center;
  std::vector<double> normal;
  double radius = 1.0;
  double tube_radius = 0.0;  ///< 0 selects the variant's default
  double newton_tol = 1e-10;
  int newton_max_iter = 50;

  Formulation formulation = Formulation::Projection;

  std::optional<double> dt;  ///< unset: default_time_step(M)
  Scheme scheme = Scheme::ImexEuler;
  bool reproject = false;
  double t_end = 1.0;
  double constraint_abort_threshold = 1e-2;
  std::size_t gauss_order = kDefaultGaussOrder;

  std::string generator = "perturbation";
  double epsilon = 0.1;
  std::optional<std::uint64_t> seed;
  std::vector<double> base_point;
  int k = 1;
  double mobius_a = 0.5;
  double theta0 = 0.3, alpha = 0.4, phi0 = 0.2, beta = 0.6;
  std::vector<double> point;

  std::size_t stride = 1;
  std::vector<double> radii;
  std::vector<double> snapshot_times;

  std::string output_dir;  ///< empty: "out/<name>"
  std::string calibration_file;

  /// Entries exactly as read, in file order.
  std::vector<std::pair<std::string, std::string>> raw;
};

/// Parse and validate. Errors have kind Config and name the offending key.
ExperimentConfig parse_config(const std::string& text, const std::string& name = "experiment");
/// Reads the file; the config name is the file stem.
ExperimentConfig load_config(const std::string& path);
/// Overwrite one key on an already parsed config and revalidate.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its resolved value (defaults included), sorted by key.
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg);

Manifold build_manifold(const ExperimentConfig& cfg);
GridFunction build_initial_datum(const ExperimentConfig& cfg, const Manifold& N, const GridPtr& grid);
SolverOptions build_solver_options(const ExperimentConfig& cfg);

/// Locale-independent shortest round-trip text for a double.
std::string format_number(double v);
/// Fixed 17-significant-digit text for a double.
std::string format_fixed17(double v);

}  // namespace hhflow
