#include "hhflow/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include "hhflow/error.hpp"
#include "hhflow/frac_calc.hpp"
#include "hhflow/spectral.hpp"

namespace hhflow {

namespace {

Vec node_point(const GridFunction& u, std::size_t j) {
  Vec p(static_cast<Eigen::Index>(u.components()));
  for (std::size_t c = 0; c < u.components(); ++c) p(static_cast<Eigen::Index>(c)) = u(j, c);
  return p;
}

double ls_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (t[i] - mt) * (y[i] - my);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return den > 0.0 ? num / den : 0.0;
}

double local_energy_from_density(const GridFunction& density, double x0, double R) {
  const CircleGrid& grid = density.grid();
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (chord_distance(grid.node(j), x0) < R) acc += density(j, 0);
  }
  return acc * grid.spacing();
}

}  // namespace

GridFunction energy_density(const GridFunction& u) {
  const GridFunction q = frac_power_spectral(u, 0.25);
  GridFunction d(u.grid_ptr(), 1);
  for (std::size_t j = 0; j < u.size(); ++j) {
    double s = 0.0;
    for (std::size_t c = 0; c < u.components(); ++c) s += q(j, c) * q(j, c);
    d(j, 0) = 0.5 * s;
  }
  return d;
}

double local_energy(const GridFunction& u, double x0, double R) {
  require(R > 0.0 && std::isfinite(R), ErrorKind::InvalidArgument, "local_energy: radius must be positive");
  return local_energy_from_density(energy_density(u), x0, R);
}

double energy_concentration(const GridFunction& u, double R) {
  require(R > 0.0 && std::isfinite(R), ErrorKind::InvalidArgument, "energy_concentration: radius must be positive");
  const GridFunction d = energy_density(u);
  double best = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) best = std::max(best, local_energy_from_density(d, u.grid().node(j), R));
  return best;
}

double constraint_violation(const Manifold& N, const GridFunction& u) {
  require(u.components() == N.ambient_dim(), ErrorKind::SizeMismatch, "constraint_violation: dimension mismatch");
  double worst = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec p = node_point(u, j);
    worst = std::max(worst, (p - N.project(p)).squaredNorm());
  }
  return worst;
}

double harmonic_residual(const Manifold& N, const GridFunction& u) {
  require(u.components() == N.ambient_dim(), ErrorKind::SizeMismatch, "harmonic_residual: dimension mismatch");
  const GridFunction L = frac_laplacian_spectral(u, 0.5);
  GridFunction T(u.grid_ptr(), u.components());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec t = N.jacobian(node_point(u, j)) * node_point(L, j);
    for (std::size_t c = 0; c < u.components(); ++c) T(j, c) = t(static_cast<Eigen::Index>(c));
  }
  return T.l2_norm();
}

double sup_variation(const GridFunction& u) {
  const Eigen::VectorXd m = u.mean();
  double worst = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) worst = std::max(worst, (u.values().row(static_cast<Eigen::Index>(j)).transpose() - m).norm());
  return worst;
}

DiagnosticsRecord make_record(const Manifold& N, const GridFunction& u, double t,
                              const std::vector<double>& radii) {
  DiagnosticsRecord r;
  r.t = t;
  r.energy = energy_half(u);
  r.constraint_violation = constraint_violation(N, u);
  r.harmonic_residual = harmonic_residual(N, u);
  r.radii = radii;
  if (!radii.empty()) {
    const GridFunction d = energy_density(u);
    for (double R : radii) {
      require(R > 0.0, ErrorKind::InvalidArgument, "diagnostic radius must be positive");
      double best = 0.0;
      for (std::size_t j = 0; j < u.size(); ++j) best = std::max(best, local_energy_from_density(d, u.grid().node(j), R));
      r.eps_R.push_back(best);
    }
  }
  r.mean_point = u.mean();
  r.sup_variation = sup_variation(u);
  return r;
}

EnergyDecayReport energy_decay_check(const std::vector<double>& E, double tol_per_step) {
  EnergyDecayReport rep;
  if (E.empty()) {
    rep.pass = false;
    rep.message = "empty trajectory";
    return rep;
  }
  for (std::size_t n = 0; n < E.size(); ++n) {
    if (n > 0) rep.max_increase = std::max(rep.max_increase, E[n] - E[n - 1]);
    rep.max_above_initial = std::max(rep.max_above_initial, E[n] - E[0]);
    const bool step_bad = n > 0 && E[n] > E[n - 1] + tol_per_step;
    const bool initial_bad = E[n] > E[0] + tol_per_step;
    if ((step_bad || initial_bad) && !rep.first_violation) {
      rep.first_violation = n;
      std::ostringstream os;
      os.precision(17);
      os << "energy increased at record " << n << ": E = " << E[n];
      if (step_bad) os << " > previous " << E[n - 1];
      if (initial_bad) os << " > initial " << E[0];
      rep.message = os.str();
    }
  }
  rep.pass = !rep.first_violation.has_value();
  if (rep.pass) rep.message = "energy non-increasing";
  return rep;
}

EnergyDecayReport energy_decay_check(const std::vector<DiagnosticsRecord>& trajectory, double tol_per_step) {
  std::vector<double> E;
  E.reserve(trajectory.size());
  for (const auto& r : trajectory) E.push_back(r.energy);
  return energy_decay_check(E, tol_per_step);
}

ConvergenceVerdict convergence_detector(const std::vector<DiagnosticsRecord>& trajectory,
                                        std::size_t window, const ConvergenceOptions& options) {
  require(!trajectory.empty(), ErrorKind::InvalidArgument, "convergence_detector: empty trajectory");
  require(window >= 1 && trajectory.size() >= window, ErrorKind::InvalidArgument,
          "convergence_detector: trajectory shorter than the window");
  ConvergenceVerdict v;
  const DiagnosticsRecord& last = trajectory.back();
  v.sup_variation = last.sup_variation;
  v.final_energy = last.energy;
  v.energy_tol = options.energy_tol_fraction * trajectory.front().energy;
  v.converged_to_point = v.sup_variation <= options.point_tol && v.final_energy <= v.energy_tol;
  std::vector<double> t, e, s, h;
  for (std::size_t i = trajectory.size() - window; i < trajectory.size(); ++i) {
    t.push_back(trajectory[i].t);
    e.push_back(trajectory[i].energy);
    s.push_back(trajectory[i].sup_variation);
    h.push_back(trajectory[i].harmonic_residual);
  }
  v.energy_slope = ls_slope(t, e);
  v.variation_slope = ls_slope(t, s);
  v.residual_slope = ls_slope(t, h);
  return v;
}

}  // namespace hhflow
