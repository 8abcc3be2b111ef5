#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hhflow/grid_function.hpp"
#include "hhflow/manifold.hpp"

namespace hhflow {

struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;
  double constraint_violation = 0.0;
  double harmonic_residual = 0.0;
  std::vector<double> radii;
  std::vector<double> eps_R;  ///< epsilon(R) for each entry of radii
  Eigen::VectorXd mean_point;
  double sup_variation = 0.0;  ///< sup_x |u(x) - mean u|
};

/// Node-wise energy density 1/2 |(-Delta)^{1/4} u|^2; h times its sum is E_{1/2}.
GridFunction energy_density(const GridFunction& u);

/// 1/2 int over the chord ball B_R(x0) of |(-Delta)^{1/4} u|^2. Any R > 0 is
/// accepted; R > 2 covers the whole circle.
double local_energy(const GridFunction& u, double x0, double R);

/// max over node centres of local_energy(u, x_j, R).
double energy_concentration(const GridFunction& u, double R);

/// max over nodes of |u - pi(u)|^2.
double constraint_violation(const Manifold& N, const GridFunction& u);

/// || dpi(u) (-Delta)^{1/2} u ||_{L^2}.
double harmonic_residual(const Manifold& N, const GridFunction& u);

/// sup_x |u(x) - mean u|.
double sup_variation(const GridFunction& u);

DiagnosticsRecord make_record(const Manifold& N, const GridFunction& u, double t,
                              const std::vector<double>& radii);

struct EnergyDecayReport {
  bool pass = true;
  std::optional<std::size_t> first_violation;  ///< record index of the first failure
  double max_increase = 0.0;                   ///< largest E(t_{n+1}) - E(t_n)
  double max_above_initial = 0.0;              ///< largest E(t) - E(0)
  std::string message;
};

/// E(t_{n+1}) <= E(t_n) + tol_per_step and E(t) <= E(0) + tol_per_step.
EnergyDecayReport energy_decay_check(const std::vector<double>& energies, double tol_per_step);
EnergyDecayReport energy_decay_check(const std::vector<DiagnosticsRecord>& trajectory, double tol_per_step);

struct ConvergenceOptions {
  double point_tol = 0.05;
  double energy_tol_fraction = 0.1;  ///< energy_tol = fraction * E(0)
};

struct ConvergenceVerdict {
  bool converged_to_point = false;
  double sup_variation = 0.0;
  double final_energy = 0.0;
  double energy_tol = 0.0;
  /// Least-squares slopes over the trailing window.
  double energy_slope = 0.0;
  double variation_slope = 0.0;
  double residual_slope = 0.0;
};

ConvergenceVerdict convergence_detector(const std::vector<DiagnosticsRecord>& trajectory,
                                        std::size_t window, const ConvergenceOptions& options = {});

}  // namespace hhflow
