#include "hhflow/flow.hpp"

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

void set_node(GridFunction& u, std::size_t j, const Vec& p) {
  for (std::size_t c = 0; c < u.components(); ++c) u(j, c) = p(static_cast<Eigen::Index>(c));
}

std::string at_time(double t) {
  std::ostringstream os;
  os.precision(10);
  os << " at t = " << t;
  return os.str();
}

}  // namespace

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::Projection: return "projection";
    case Formulation::Divergence: return "divergence";
    case Formulation::Quadratic: return "quadratic";
    case Formulation::Hypersurface: return "hypersurface";
    case Formulation::Sphere: return "sphere";
  }
  return "unknown";
}

std::optional<Formulation> parse_formulation(const std::string& name) {
  for (Formulation f : {Formulation::Projection, Formulation::Divergence, Formulation::Quadratic,
                        Formulation::Hypersurface, Formulation::Sphere}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

void require_compatible(const Manifold& N, Formulation f) {
  if (f == Formulation::Hypersurface) {
    require(N.is_hypersurface(), ErrorKind::NotAHypersurface,
            "hypersurface formulation needs a codimension-1 target, got the " + N.name());
  }
  if (f == Formulation::Sphere) {
    require(N.kind() == Manifold::Kind::Sphere, ErrorKind::InvalidArgument,
            "sphere formulation needs a sphere target, got the " + N.name());
  }
}

GridFunction rhs_projection_form(const Manifold& N, const GridFunction& u) {
  require_target_dimension(N, u, "rhs_projection_form");
  GridFunction pu(u.grid_ptr(), u.components());
  for (std::size_t j = 0; j < u.size(); ++j) set_node(pu, j, N.project(node_point(u, j)));
  const GridFunction Lu = frac_laplacian_spectral(u, 0.5);
  GridFunction r = frac_laplacian_spectral(pu, 0.5);
  for (std::size_t j = 0; j < u.size(); ++j) {
    const Vec t = N.jacobian(node_point(u, j)) * node_point(Lu, j);
    for (std::size_t c = 0; c < u.components(); ++c) r(j, c) -= t(static_cast<Eigen::Index>(c));
  }
  return r;
}

GridFunction rhs_divergence_form(const Manifold& N, const GridFunction& u, std::size_t gauss_order) {
  require_target_dimension(N, u, "rhs_divergence_form");
  const OffDiagKernel B = B_u(N, u, gauss_order);
  GridFunction r = leading_term(N, u, B);
  const CurvatureKernel A = A_u(N, u, u, u, gauss_order, SegmentPolicy::Strict);
  r += frac_divergence(remainder_flux(N, u, A.A), 0.5);
  r *= 1.0 / duality_constant(0.5, u.size());
  return r;
}

GridFunction rhs_quadratic_form(const Manifold& N, const GridFunction& u, std::size_t gauss_order) {
  require_target_dimension(N, u, "rhs_quadratic_form");
  const CircleGrid& grid = u.grid();
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  std::vector<Vec> pts(M);
  for (std::size_t j = 0; j < M; ++j) pts[j] = node_point(u, j);
  GridFunction r(u.grid_ptr(), n);
  const double scale = calibrate_constant(0.5, M) * grid.spacing();
  for (std::size_t x = 0; x < M; ++x) {
    Vec acc = Vec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t y = 0; y < M; ++y) {
      if (x == y) continue;
      const Vec d = pts[x] - pts[y];
      if (d.squaredNorm() == 0.0) continue;
      const double c = grid.chord(x, y);
      acc += P_contract(N, pts[x], pts[y], d, gauss_order) / (c * c);
    }
    set_node(r, x, scale * acc);
  }
  return r;
}

GridFunction rhs_hypersurface_form(const Manifold& N, const GridFunction& u, std::size_t gauss_order) {
  const HypersurfaceObjects obj = hypersurface_objects(N, u, gauss_order);
  GridFunction r(u.grid_ptr(), u.components());
  for (std::size_t j = 0; j < u.size(); ++j)
    for (std::size_t c = 0; c < u.components(); ++c) r(j, c) = obj.lambda(j, 0) * obj.normal(j, c);
  return r;
}

GridFunction rhs_sphere_form(const GridFunction& u, double tol) {
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double r = u.values().row(static_cast<Eigen::Index>(j)).norm();
    require(std::abs(r - 1.0) <= tol, ErrorKind::NotOnSphere, "sphere formulation: |u| differs from 1 at node " + std::to_string(j));
  }
  const OffDiagKernel du = frac_gradient(u, 0.5);
  GridFunction energy = od_pairing(du, du);
  energy *= 1.0 / duality_constant(0.5, u.size());
  return pointwise_product(energy, u);
}

GridFunction rhs(const Manifold& N, const GridFunction& u, Formulation f, std::size_t gauss_order) {
  require_compatible(N, f);
  switch (f) {
    case Formulation::Projection: return rhs_projection_form(N, u);
    case Formulation::Divergence: return rhs_divergence_form(N, u, gauss_order);
    case Formulation::Quadratic: return rhs_quadratic_form(N, u, gauss_order);
    case Formulation::Hypersurface: return rhs_hypersurface_form(N, u, gauss_order);
    case Formulation::Sphere:
      require_target_dimension(N, u, "rhs_sphere_form");
      return rhs_sphere_form(u);
  }
  fail(ErrorKind::InvalidArgument, "unknown formulation");
}

GridFunction flow_velocity(const Manifold& N, const GridFunction& u, Formulation f, std::size_t gauss_order) {
  return rhs(N, u, f, gauss_order) - frac_laplacian_spectral(u, 0.5);
}

std::string to_string(Scheme s) { return s == Scheme::ImexEuler ? "imex_euler" : "imex_midpoint"; }

std::optional<Scheme> parse_scheme(const std::string& name) {
  if (name == "imex_euler") return Scheme::ImexEuler;
  if (name == "imex_midpoint") return Scheme::ImexMidpoint;
  return std::nullopt;
}

double default_time_step(std::size_t M) {
  double dt = 1e-3;
  for (std::size_t m = 256; m < M; m *= 2) dt *= 0.5;
  return dt;
}

GridFunction imex_update(const GridFunction& u, const GridFunction& r, double dt, Scheme scheme) {
  require_same_grid(u, r, "imex_update");
  require(u.components() == r.components(), ErrorKind::SizeMismatch, "imex_update: rhs has wrong dimension");
  require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "time step must be positive");
  SpectralField cu = to_spectral(u);
  const SpectralField cr = to_spectral(r);
  const std::size_t M = u.size();
  for (std::size_t row = 0; row < M; ++row) {
    const double k = std::abs(static_cast<double>(wavenumber(row, M)));
    const Eigen::Index ri = static_cast<Eigen::Index>(row);
    for (Eigen::Index c = 0; c < cu.coefficients().cols(); ++c) {
      auto& uh = cu.coefficients()(ri, c);
      const auto rh = cr.coefficients()(ri, c);
      if (scheme == Scheme::ImexEuler) {
        uh = (uh + dt * rh) / (1.0 + dt * k);
      } else {
        uh = ((1.0 - 0.5 * dt * k) * uh + dt * rh) / (1.0 + 0.5 * dt * k);
      }
    }
  }
  return from_spectral(cu);
}

FlowState step(const FlowState& state, const Manifold& N, Formulation f, const SolverOptions& opts) {
  require(opts.dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
  if (!state.u.all_finite()) fail(ErrorKind::NonFinite, "non-finite values in the solution" + at_time(state.t));
  FlowState next;
  try {
    next.last_rhs = rhs(N, state.u, f, opts.gauss_order);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::OutsideTube) fail(ErrorKind::OutsideTube, std::string(e.what()) + at_time(state.t));
    throw;
  }
  next.u = imex_update(state.u, next.last_rhs, opts.dt, opts.scheme);
  next.t = state.t + opts.dt;
  next.step_count = state.step_count + 1;
  if (!next.u.all_finite()) fail(ErrorKind::NonFinite, "non-finite values in the solution" + at_time(next.t));
  for (std::size_t j = 0; j < next.u.size(); ++j) {
    const Vec p = node_point(next.u, j);
    if (!N.in_safe_tube(p)) {
      fail(ErrorKind::OutsideTube, "flow left the safe tube at node " + std::to_string(j) + at_time(next.t));
    }
    if (opts.reproject) set_node(next.u, j, N.project(p));
  }
  return next;
}

Trajectory evolve(const GridFunction& u0, const Manifold& N, Formulation f, const SolverOptions& opts,
                  const EvolveOptions& evolve_opts) {
  require_compatible(N, f);
  require_target_dimension(N, u0, "evolve");
  require(opts.dt > 0.0 && std::isfinite(opts.dt), ErrorKind::InvalidArgument, "time step must be positive");
  require(opts.t_end >= 0.0, ErrorKind::InvalidArgument, "t_end must be non-negative");
  require(evolve_opts.stride >= 1, ErrorKind::InvalidArgument, "diagnostics stride must be >= 1");
  const double v0 = constraint_violation(N, u0);
  require(std::sqrt(v0) <= 10.0 * N.newton_tol(), ErrorKind::InvalidArgument,
          "initial datum does not lie on the target manifold");

  Trajectory traj;
  FlowState state;
  state.u = u0;
  traj.records.push_back(make_record(N, state.u, 0.0, evolve_opts.radii));
  if (evolve_opts.on_record) evolve_opts.on_record(traj.records.back());
  if (evolve_opts.on_step) evolve_opts.on_step(state);

  const auto nsteps = static_cast<std::size_t>(std::ceil(opts.t_end / opts.dt - 1e-9));
  SolverOptions local = opts;
  for (std::size_t k = 1; k <= nsteps; ++k) {
    const double t_target = k == nsteps ? opts.t_end : static_cast<double>(k) * opts.dt;
    local.dt = k == nsteps ? opts.t_end - state.t : opts.dt;
    state = step(state, N, f, local);
    state.t = t_target;
    const double violation = constraint_violation(N, state.u);
    if (violation > opts.constraint_abort_threshold) {
      std::ostringstream os;
      os.precision(6);
      os << "constraint violation " << violation << " exceeds threshold " << opts.constraint_abort_threshold
         << at_time(state.t);
      fail(ErrorKind::ConstraintBlowup, os.str());
    }
    if (k % evolve_opts.stride == 0 || k == nsteps) {
      traj.records.push_back(make_record(N, state.u, state.t, evolve_opts.radii));
      if (evolve_opts.on_record) evolve_opts.on_record(traj.records.back());
    }
    if (evolve_opts.on_step) evolve_opts.on_step(state);
  }
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace hhflow
