#pragma once

#include <cstddef>
#include <limits>

#include "hhflow/grid_function.hpp"
#include "hhflow/off_diag_kernel.hpp"
#include "hhflow/spectral.hpp"

namespace hhflow {

// ---------------------------------------------------------------------------
// Constants.
//
// The singular-integral form of (-Delta)^s and the duality between d_s and
// (-Delta)^{s/2} hold only up to constants. Both are pinned here by
// calibration on cos(x), the k = 1 eigenfunction:
//
//   C_disc(s, M): singular_sum(cos) * C_disc == cos       (|1|^{2s} = 1)
//   C_dual(s, M): sum_x |d_s cos|^2(x) h == C_dual * |(-Delta)^{s/2} cos|^2
//
// For s = 1/2 the continuum values are 1/pi and 2 pi.
// ---------------------------------------------------------------------------

/// Calibrated constant for the punctured singular quadrature. Cached per (s, M).
double calibrate_constant(double s, std::size_t M);

/// Duality constant between the off-diagonal pairing and the spectral side.
/// Cached per (s, M).
double duality_constant(double s, std::size_t M);

/// Replace the cached constants for (s, M), e.g. with values read from a
/// calibration table. Later calls of the two functions above return these.
void install_constants(double s, std::size_t M, double c_disc, double c_dual);

/// (-Delta)^s via C_disc * h * sum_{j != i} (f_i - f_j) / |x_i - x_j|^{1+2s},
/// summed over symmetric offsets +-m. Requires s in (0, 1).
GridFunction frac_laplacian_singular(const GridFunction& f, double s);

/// The same punctured sum without the calibration constant.
GridFunction singular_sum(const GridFunction& f, double s);

// ---------------------------------------------------------------------------
// Off-diagonal calculus.
// ---------------------------------------------------------------------------

/// d_s f(x_i, x_j) = (f(x_i) - f(x_j)) / |x_i - x_j|^s, zero on the diagonal.
/// For s = 1/2 the diagonal limit f'(x) (spectral derivative) is attached.
OffDiagKernel frac_gradient(const GridFunction& f, double s);

/// F . G (x_i) = h * sum_{j != i} <F_ij, G_ij> / |x_i - x_j| + h <L_F(x_i), L_G(x_i)>,
/// contracting all components. The second term is present when both kernels
/// carry a diagonal limit.
GridFunction od_pairing(const OffDiagKernel& F, const OffDiagKernel& G);

/// Matrix-vector pairing: F has rows * G.components() components (row-major),
/// result component r is sum_k F_{rk} . G_k paired as above.
GridFunction od_pairing_matvec(const OffDiagKernel& F, const OffDiagKernel& G);

/// |F|(x) = sqrt(F . F (x)).
GridFunction od_norm(const OffDiagKernel& F);

/// ||F||_{L^p_od} = (sum_{i != j} |F_ij|^p h^2 / |x_i - x_j|)^{1/p}.
double od_lp_norm(const OffDiagKernel& F, double p);

/// div_s F(x_k) = h * sum_{j != k} (F(x_k, x_j) - F(x_j, x_k)) / |x_k - x_j|^{1+s}.
/// This is the exact transpose of phi -> sum_{i != j} F_ij d_s phi_ij h^2 / |x_i - x_j|.
GridFunction frac_divergence(const OffDiagKernel& F, double s);

/// d_s(fg) - d_s f * g(x) - f(y) * d_s g, an algebraic identity.
OffDiagKernel leibniz_residual(const GridFunction& f, const GridFunction& g, double s);

/// (-Delta)^{1/2}(fg) - (-Delta)^{1/2} f g - f (-Delta)^{1/2} g + (2 / C_dual) d f . d g,
/// every Laplacian taken through the calibrated singular quadrature.
GridFunction product_laplacian_residual(const GridFunction& f, const GridFunction& g);

/// Coefficient in front of d_{1/2} f . d_{1/2} g in the product rule: 2 / C_dual.
double product_rule_coefficient(std::size_t M);

// ---------------------------------------------------------------------------
// Commutator C(a, b) = R(a grad b) - a (-Delta)^{1/2} b.
//
// `a` is either scalar (1 component) or a matrix with a.components() =
// rows * b.components(), stored row-major per node.
// ---------------------------------------------------------------------------

GridFunction commutator(const GridFunction& a, const GridFunction& b);

/// -(2 / C_dual) d a . d b - R(grad a . b) + (-Delta)^{1/2} a . b, with the
/// fractional Laplacian of `a` taken through the singular quadrature.
GridFunction commutator_alternate_form(const GridFunction& a, const GridFunction& b);

GridFunction commutator_alt_residual(const GridFunction& a, const GridFunction& b);

/// Node-wise matrix (or scalar) times vector product a(x) b(x).
GridFunction apply_matrix_field(const GridFunction& a, const GridFunction& b);

// ---------------------------------------------------------------------------
// Seminorms and energy.
// ---------------------------------------------------------------------------

/// D_{s,q} f at every node (before the outer L^p norm).
GridFunction gagliardo_density(const GridFunction& f, double s, double q);

/// || D_{s,q} f ||_{L^p}; p = infinity gives the max norm.
double gagliardo_seminorm(const GridFunction& f, double s, double p, double q);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// E_{1/2}(u) = 1/2 int |(-Delta)^{1/4} u|^2 = pi * sum_k |k| |c_k|^2.
double energy_half(const GridFunction& u);

}  // namespace hhflow
