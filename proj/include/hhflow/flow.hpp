#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hhflow/diagnostics.hpp"
#include "hhflow/geometry.hpp"
#include "hhflow/grid_function.hpp"
#include "hhflow/manifold.hpp"

namespace hhflow {

/// Right-hand side r(u) of u_t + (-Delta)^{1/2} u = r(u).
enum class Formulation { Projection, Divergence, Quadratic, Hypersurface, Sphere };

std::string to_string(Formulation f);
std::optional<Formulation> parse_formulation(const std::string& name);
/// Throws InvalidArgument / NotAHypersurface when the formulation does not fit N.
void require_compatible(const Manifold& N, Formulation f);

/// (-Delta)^{1/2} pi(u) - dpi(u) (-Delta)^{1/2} u, spectral.
GridFunction rhs_projection_form(const Manifold& N, const GridFunction& u);

/// (d u . d(dpi_perp(u)) + div_{1/2}(A_u(du, du) dpi_perp(u(y)) / |x-y|^{1/2})) / C_dual,
/// the leading term assembled through B_u.
GridFunction rhs_divergence_form(const Manifold& N, const GridFunction& u,
                                 std::size_t gauss_order = kDefaultGaussOrder);

/// C_disc h sum_{y != x} P(u(x), u(y))(u(x) - u(y), u(x) - u(y)) / |x - y|^2.
GridFunction rhs_quadratic_form(const Manifold& N, const GridFunction& u,
                                std::size_t gauss_order = kDefaultGaussOrder);

/// lambda nu(u) from hypersurface_objects.
GridFunction rhs_hypersurface_form(const Manifold& N, const GridFunction& u,
                                   std::size_t gauss_order = kDefaultGaussOrder);

/// u |d_{1/2} u|^2 / C_dual. Throws NotOnSphere unless | |u| - 1 | <= tol at every node.
GridFunction rhs_sphere_form(const GridFunction& u, double tol = 1e-3);

GridFunction rhs(const Manifold& N, const GridFunction& u, Formulation f,
                 std::size_t gauss_order = kDefaultGaussOrder);

/// r(u) - (-Delta)^{1/2} u, the time derivative of the exact flow.
GridFunction flow_velocity(const Manifold& N, const GridFunction& u, Formulation f,
                           std::size_t gauss_order = kDefaultGaussOrder);

enum class Scheme { ImexEuler, ImexMidpoint };
std::string to_string(Scheme s);
std::optional<Scheme> parse_scheme(const std::string& name);

struct SolverOptions {
  double dt = 1e-3;
  Scheme scheme = Scheme::ImexEuler;
  bool reproject = false;
  double t_end = 1.0;
  double constraint_abort_threshold = 1e-2;
  std::size_t gauss_order = kDefaultGaussOrder;
};

/// 1e-3 for M <= 256, halved for every doubling beyond.
double default_time_step(std::size_t M);

struct FlowState {
  double t = 0.0;
  GridFunction u;
  std::size_t step_count = 0;
  GridFunction last_rhs;
};

/// One IMEX step: linear half-Laplacian implicit in Fourier space, r(u) explicit.
FlowState step(const FlowState& state, const Manifold& N, Formulation f, const SolverOptions& opts);

/// The linear part of a step for a given explicit right-hand side.
GridFunction imex_update(const GridFunction& u, const GridFunction& r, double dt, Scheme scheme);

struct EvolveOptions {
  std::size_t stride = 1;  ///< diagnostics every `stride` steps (and at the end)
  std::vector<double> radii;
  /// Called after every accepted step (and once for the initial state).
  std::function<void(const FlowState&)> on_step;
  /// Called with every diagnostics record as soon as it is taken.
  std::function<void(const DiagnosticsRecord&)> on_record;
};

struct Trajectory {
  std::vector<DiagnosticsRecord> records;
  FlowState final_state;
};

Trajectory evolve(const GridFunction& u0, const Manifold& N, Formulation f, const SolverOptions& opts,
                  const EvolveOptions& evolve_opts = {});

}  // namespace hhflow
