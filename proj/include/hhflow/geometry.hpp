#pragma once

#include <cstddef>
#include <vector>

#include "hhflow/grid_function.hpp"
#include "hhflow/manifold.hpp"
#include "hhflow/off_diag_kernel.hpp"

namespace hhflow {

inline constexpr std::size_t kDefaultGaussOrder = 16;

/// What to do when a chord segment between u(y) and u(x) leaves the safe tube.
enum class SegmentPolicy {
  Strict,  ///< throw OutsideTube
  Flag,    ///< zero the pair and record it
};

/// Pairs (i, j) whose segment left the tube under SegmentPolicy::Flag.
struct PairFlags {
  std::size_t M = 0;
  std::vector<unsigned char> excluded;
  std::size_t count = 0;

  explicit PairFlags(std::size_t m = 0) : M(m), excluded(m * m, 0) {}
  bool is_excluded(std::size_t i, std::size_t j) const { return excluded[i * M + j] != 0; }
  void mark(std::size_t i, std::size_t j) {
    if (!excluded[i * M + j]) {
      excluded[i * M + j] = 1;
      ++count;
    }
  }
};

/// Node-wise dpi(u(x)) as a GridFunction with n * n components (row-major).
GridFunction projector_field(const Manifold& N, const GridFunction& u);
/// Node-wise Id - dpi(u(x)).
GridFunction complementary_projector_field(const Manifold& N, const GridFunction& u);

/// A_u(dv, dw)^i(x, y) = int int t d_k d_j pi_i((1 - ts) u(y) + ts u(x)) dv_j dw_k ds dt
/// with dv = v(x) - v(y), dw = w(x) - w(y); double Gauss-Legendre in (s, t).
struct CurvatureKernel {
  OffDiagKernel A;
  PairFlags flags;
};
CurvatureKernel A_u(const Manifold& N, const GridFunction& u, const GridFunction& v,
                    const GridFunction& w, std::size_t gauss_order = kDefaultGaussOrder,
                    SegmentPolicy policy = SegmentPolicy::Strict);

/// u(x) - u(y) - dpi(u(y))(u(x) - u(y)) - A_u(du, du)(x, y). Flagged pairs are
/// zero and excluded from max_abs.
struct TaylorResidual {
  OffDiagKernel residual;
  PairFlags flags;
  double max_abs = 0.0;
};
TaylorResidual taylor_residual(const Manifold& N, const GridFunction& u,
                               std::size_t gauss_order = kDefaultGaussOrder);

/// B_u(x, y) = int_0^1 d(dpi)(u(y) + s (u(x) - u(y))) ds, stored with
/// component (i * n + j) * n + l = int d_l (dpi)_{ij}.
OffDiagKernel B_u(const Manifold& N, const GridFunction& u,
                  std::size_t gauss_order = kDefaultGaussOrder);

/// d_{1/2} u . d_{1/2}(dpi_perp(u)) assembled through B_u:
/// component j = -sum_{i,l} d u_i . (B_{ijl} d u_l), with the diagonal limit
/// -u_i' d_l(dpi)_{ij}(u) u_l'.
GridFunction leading_term(const Manifold& N, const GridFunction& u, const OffDiagKernel& B);

/// The same quantity paired directly against d_{1/2} of the field dpi_perp(u).
GridFunction leading_term_direct(const Manifold& N, const GridFunction& u);

/// Omega_{jk}(x, y) = dpi(u(y))_{ik} dP_{ij} - dpi(u(y))_{ij} dP_{ik},
/// dP = d_{1/2}(dpi_perp(u)); n * n components, row-major (j, k).
OffDiagKernel omega_potential(const Manifold& N, const GridFunction& u);

/// Omega . d_{1/2} u, component j = sum_k Omega_{jk} . d u_k.
GridFunction omega_apply(const OffDiagKernel& omega, const GridFunction& u);

/// F_j(x, y) = A_u(dv, dw)^i(x, y) dpi_perp(u(y))_{ij} / |x - y|^{1/2}.
OffDiagKernel remainder_flux(const Manifold& N, const GridFunction& u, const OffDiagKernel& A);

struct Remainders {
  GridFunction R1;  ///< pointwise: int (F(x,y) - F(y,x)) / |x-y|^{3/2} dy
  GridFunction R2;
  GridFunction R3;
};
/// R1, R2, R3 for A_u(dv, dw). With v = w = u the sum
/// Omega . du + R1 + R2 + R3 reproduces d u . d(dpi_perp(u)) + div F.
Remainders remainders_R123(const Manifold& N, const GridFunction& u, const GridFunction& v,
                           const GridFunction& w, std::size_t gauss_order = kDefaultGaussOrder);
Remainders remainders_R123(const Manifold& N, const GridFunction& u, const OffDiagKernel& A);

/// R1 in duality form: phi -> sum_{x != y} F(x, y) . d_{1/2} phi(x, y) h^2 / |x - y|.
double R1_functional(const OffDiagKernel& flux, const GridFunction& phi);

/// P_j^{kl}(p, q) = int int (t - 1) d_k d_l pi_j((s - st) q + (1 + st - s) p) ds dt,
/// symmetrized in (k, l). Coefficient (j, k, l) at index (j * n + k) * n + l.
struct QuadraticCoefficients {
  std::size_t n = 0;
  std::vector<double> values;
  double operator()(std::size_t j, std::size_t k, std::size_t l) const { return values[(j * n + k) * n + l]; }
  double max_abs() const;
};
QuadraticCoefficients P_quadratic_form(const Manifold& N, const Vec& p, const Vec& q,
                                       std::size_t gauss_order = kDefaultGaussOrder);
/// sum_{k,l} P_j^{kl}(p, q) a_k a_l, evaluated without forming the tensor.
Vec P_contract(const Manifold& N, const Vec& p, const Vec& q, const Vec& a,
               std::size_t gauss_order = kDefaultGaussOrder);

/// Codimension-1 objects: A_tilde(x, y) = int dnu(u(y) + s (u(x) - u(y))) ds
/// (n * n components), nu_u = (nu(u(x)) + nu(u(y))) / 2, the contraction
/// A_tilde d_{1/2} u (with diagonal limit dnu(u) u'), and
/// lambda = (d u . A_tilde d u + div_{1/2}(d u . nu_u)) / C_dual.
///
/// nu is the normalized level-set gradient, defined off the tube wherever the
/// gradient is nonzero, so segments are not tube-checked here. The contraction
/// is evaluated exactly as (nu(u(x)) - nu(u(y))) / |x - y|^{1/2}.
struct HypersurfaceObjects {
  OffDiagKernel A_tilde;
  OffDiagKernel nu_u;
  OffDiagKernel A_tilde_du;
  GridFunction normal;  ///< nu(u(x)) per node
  GridFunction lambda;
};
HypersurfaceObjects hypersurface_objects(const Manifold& N, const GridFunction& u,
                                         std::size_t gauss_order = kDefaultGaussOrder);

/// Every node of u must be a point of R^n with n = N.ambient_dim().
void require_target_dimension(const Manifold& N, const GridFunction& u, const char* where);

}  // namespace hhflow
