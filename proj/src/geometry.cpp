#include "hhflow/geometry.hpp"

#include <cmath>
#include <string>

#include "hhflow/error.hpp"
#include "hhflow/frac_calc.hpp"
#include "hhflow/quadrature.hpp"
#include "hhflow/spectral.hpp"

namespace hhflow {

namespace {

Vec node_point(const GridFunction& u, std::size_t j) {
  Vec p(static_cast<Eigen::Index>(u.components()));
  for (std::size_t c = 0; c < u.components(); ++c) p(static_cast<Eigen::Index>(c)) = u(j, c);
  return p;
}

std::vector<Vec> node_points(const GridFunction& u) {
  std::vector<Vec> pts(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) pts[j] = node_point(u, j);
  return pts;
}

std::vector<Hessian> node_hessians(const Manifold& N, const std::vector<Vec>& pts) {
  std::vector<Hessian> H;
  H.reserve(pts.size());
  for (const Vec& p : pts) H.push_back(N.hessian(p));
  return H;
}

}  // namespace

void require_target_dimension(const Manifold& N, const GridFunction& u, const char* where) {
  require(u.components() == N.ambient_dim(), ErrorKind::SizeMismatch,
          std::string(where) + ": map has " + std::to_string(u.components()) +
              " components but the target lives in R^" + std::to_string(N.ambient_dim()));
}

GridFunction projector_field(const Manifold& N, const GridFunction& u) {
  require_target_dimension(N, u, "projector_field");
  const std::size_t n = N.ambient_dim();
  GridFunction P(u.grid_ptr(), n * n);
  for (std::size_t x = 0; x < u.size(); ++x) {
    const Mat J = N.jacobian(node_point(u, x));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) P(x, i * n + j) = J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return P;
}

GridFunction complementary_projector_field(const Manifold& N, const GridFunction& u) {
  const std::size_t n = N.ambient_dim();
  GridFunction P = projector_field(N, u);
  for (std::size_t x = 0; x < u.size(); ++x)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) P(x, i * n + j) = (i == j ? 1.0 : 0.0) - P(x, i * n + j);
  return P;
}

CurvatureKernel A_u(const Manifold& N, const GridFunction& u, const GridFunction& v,
                    const GridFunction& w, std::size_t gauss_order, SegmentPolicy policy) {
  require_target_dimension(N, u, "A_u");
  require_same_grid(u, v, "A_u");
  require_same_grid(u, w, "A_u");
  require(v.components() == u.components() && w.components() == u.components(), ErrorKind::SizeMismatch,
          "A_u: v and w must have the target dimension");
  const GaussRule& g = gauss_legendre(gauss_order);
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  CurvatureKernel out{OffDiagKernel(u.grid_ptr(), n), PairFlags(M)};
  std::vector<double> pu(M * n), pv(M * n), pw(M * n);
  for (std::size_t j = 0; j < M; ++j)
    for (std::size_t c = 0; c < n; ++c) {
      pu[j * n + c] = u(j, c);
      pv[j * n + c] = v(j, c);
      pw[j * n + c] = w(j, c);
    }
  double du[kMaxAmbient], dv[kMaxAmbient], dw[kMaxAmbient], pt[kMaxAmbient], val[kMaxAmbient], acc[kMaxAmbient];
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j) continue;
      double nv = 0.0, nw = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        du[c] = pu[i * n + c] - pu[j * n + c];
        dv[c] = pv[i * n + c] - pv[j * n + c];
        dw[c] = pw[i * n + c] - pw[j * n + c];
        nv += dv[c] * dv[c];
        nw += dw[c] * dw[c];
        acc[c] = 0.0;
      }
      if (nv == 0.0 || nw == 0.0) continue;
      bool inside = true;
      for (std::size_t a = 0; a < g.size() && inside; ++a) {
        const double t = g.nodes[a];
        for (std::size_t b = 0; b < g.size(); ++b) {
          const double ts = t * g.nodes[b];
          for (std::size_t c = 0; c < n; ++c) pt[c] = pu[j * n + c] + ts * du[c];
          if (!N.try_hessian_contract(pt, dw, dv, val)) {
            inside = false;
            break;
          }
          const double wt = g.weights[a] * g.weights[b] * t;
          for (std::size_t c = 0; c < n; ++c) acc[c] += wt * val[c];
        }
      }
      if (!inside) {
        if (policy == SegmentPolicy::Strict) {
          fail(ErrorKind::OutsideTube, "A_u: chord segment between nodes " + std::to_string(j) + " and " +
                                           std::to_string(i) + " leaves the safe tube of the " + N.name());
        }
        out.flags.mark(i, j);
        continue;
      }
      double* k = out.A.at(i, j);
      for (std::size_t c = 0; c < n; ++c) k[c] = acc[c];
    }
  }
  return out;
}

TaylorResidual taylor_residual(const Manifold& N, const GridFunction& u, std::size_t gauss_order) {
  require_target_dimension(N, u, "taylor_residual");
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  const auto pts = node_points(u);
  std::vector<Mat> J(M);
  for (std::size_t x = 0; x < M; ++x) {
    const double d2 = (pts[x] - N.project(pts[x])).squaredNorm();
    require(d2 <= N.newton_tol(), ErrorKind::InvalidArgument,
            "taylor_residual: map does not take values on the manifold");
    J[x] = N.jacobian(pts[x]);
  }
  CurvatureKernel A = A_u(N, u, u, u, gauss_order, SegmentPolicy::Flag);
  TaylorResidual out{OffDiagKernel(u.grid_ptr(), n), std::move(A.flags), 0.0};
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j || out.flags.is_excluded(i, j)) continue;
      const Vec du = pts[i] - pts[j];
      const Vec lin = J[j] * du;
      for (std::size_t c = 0; c < n; ++c) {
        const Eigen::Index ci = static_cast<Eigen::Index>(c);
        const double r = du(ci) - lin(ci) - A.A(i, j, c);
        out.residual(i, j, c) = r;
        out.max_abs = std::max(out.max_abs, std::abs(r));
      }
    }
  }
  return out;
}

OffDiagKernel B_u(const Manifold& N, const GridFunction& u, std::size_t gauss_order) {
  require_target_dimension(N, u, "B_u");
  const GaussRule& g = gauss_legendre(gauss_order);
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  OffDiagKernel B(u.grid_ptr(), n * n * n);
  const auto pts = node_points(u);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j) continue;
      const Vec du = pts[i] - pts[j];
      double* k = B.at(i, j);
      for (std::size_t b = 0; b < g.size(); ++b) {
        const Hessian H = N.hessian(pts[j] + g.nodes[b] * du);
        for (std::size_t a = 0; a < n; ++a) {
          const Mat& S = H.slice(a);
          for (std::size_t jj = 0; jj < n; ++jj)
            for (std::size_t l = 0; l < n; ++l)
              k[(a * n + jj) * n + l] += g.weights[b] * S(static_cast<Eigen::Index>(jj), static_cast<Eigen::Index>(l));
        }
      }
    }
  }
  return B;
}

GridFunction leading_term(const Manifold& N, const GridFunction& u, const OffDiagKernel& B) {
  require_target_dimension(N, u, "leading_term");
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  require(B.components() == n * n * n, ErrorKind::SizeMismatch, "leading_term: B_u has wrong shape");
  const CircleGrid& grid = u.grid();
  const double h = grid.spacing();
  const auto pts = node_points(u);
  const auto H = node_hessians(N, pts);
  const GridFunction du = derivative(u);
  GridFunction out(u.grid_ptr(), n);
  for (std::size_t x = 0; x < M; ++x) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t y = 0; y < M; ++y) {
        if (y == x) continue;
        const double* b = B.at(x, y);
        const double c2 = grid.chord(x, y) * grid.chord(x, y);
        double q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double di = u(x, i) - u(y, i);
          for (std::size_t l = 0; l < n; ++l) q += di * b[(i * n + j) * n + l] * (u(x, l) - u(y, l));
        }
        acc += q / c2;
      }
      double diag = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l)
          diag += du(x, i) * H[x].slice(i)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) * du(x, l);
      out(x, j) = -h * (acc + diag);
    }
  }
  return out;
}

GridFunction leading_term_direct(const Manifold& N, const GridFunction& u) {
  require_target_dimension(N, u, "leading_term_direct");
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  const CircleGrid& grid = u.grid();
  const double h = grid.spacing();
  const OffDiagKernel du = frac_gradient(u, 0.5);
  const OffDiagKernel dP = frac_gradient(complementary_projector_field(N, u), 0.5);
  GridFunction out(u.grid_ptr(), n);
  for (std::size_t x = 0; x < M; ++x) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t y = 0; y < M; ++y) {
        if (y == x) continue;
        const double* a = du.at(x, y);
        const double* p = dP.at(x, y);
        double q = 0.0;
        for (std::size_t i = 0; i < n; ++i) q += a[i] * p[i * n + j];
        acc += q / grid.chord(x, y);
      }
      double diag = 0.0;
      for (std::size_t i = 0; i < n; ++i) diag += du.diagonal(x)[i] * dP.diagonal(x)[i * n + j];
      out(x, j) = h * (acc + diag);
    }
  }
  return out;
}

OffDiagKernel omega_potential(const Manifold& N, const GridFunction& u) {
  require_target_dimension(N, u, "omega_potential");
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  const GridFunction P = projector_field(N, u);
  const OffDiagKernel dP = frac_gradient(complementary_projector_field(N, u), 0.5);
  OffDiagKernel omega(u.grid_ptr(), n * n);
  omega.enable_diagonal_limit();
  std::vector<double> X(n * n);
  auto assemble = [&](const double* Py, const double* dp, double* out) {
    // X_jk = sum_i dpi(u(y))_{ik} dP_{ij}; Omega = X - X^T.
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += Py[i * n + k] * dp[i * n + j];
        X[j * n + k] = acc;
      }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out[j * n + k] = X[j * n + k] - X[k * n + j];
  };
  std::vector<double> Py(n * n);
  for (std::size_t x = 0; x < M; ++x) {
    for (std::size_t y = 0; y < M; ++y) {
      if (x == y) continue;
      for (std::size_t c = 0; c < n * n; ++c) Py[c] = P(y, c);
      assemble(Py.data(), dP.at(x, y), omega.at(x, y));
    }
    for (std::size_t c = 0; c < n * n; ++c) Py[c] = P(x, c);
    assemble(Py.data(), dP.diagonal(x), omega.diagonal(x));
  }
  return omega;
}

GridFunction omega_apply(const OffDiagKernel& omega, const GridFunction& u) {
  return od_pairing_matvec(omega, frac_gradient(u, 0.5));
}

OffDiagKernel remainder_flux(const Manifold& N, const GridFunction& u, const OffDiagKernel& A) {
  require_target_dimension(N, u, "remainder_flux");
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  require(A.components() == n, ErrorKind::SizeMismatch, "remainder_flux: A_u has wrong shape");
  const CircleGrid& grid = u.grid();
  const GridFunction Q = complementary_projector_field(N, u);
  OffDiagKernel F(u.grid_ptr(), n);
  for (std::size_t x = 0; x < M; ++x) {
    for (std::size_t y = 0; y < M; ++y) {
      if (x == y) continue;
      const double inv = 1.0 / std::sqrt(grid.chord(x, y));
      const double* a = A.at(x, y);
      double* f = F.at(x, y);
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += a[i] * Q(y, i * n + j);
        f[j] = acc * inv;
      }
    }
  }
  return F;
}

Remainders remainders_R123(const Manifold& N, const GridFunction& u, const OffDiagKernel& A) {
  require_target_dimension(N, u, "remainders_R123");
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  const CircleGrid& grid = u.grid();
  const double h = grid.spacing();
  const GridFunction P = projector_field(N, u);
  const OffDiagKernel dP = frac_gradient(complementary_projector_field(N, u), 0.5);
  const OffDiagKernel du = frac_gradient(u, 0.5);

  Remainders R;
  R.R1 = frac_divergence(remainder_flux(N, u, A), 0.5);
  R.R2 = GridFunction(u.grid_ptr(), n);
  R.R3 = GridFunction(u.grid_ptr(), n);
  for (std::size_t x = 0; x < M; ++x) {
    for (std::size_t j = 0; j < n; ++j) {
      double r2 = 0.0, r3 = 0.0;
      for (std::size_t y = 0; y < M; ++y) {
        if (x == y) continue;
        const double c = grid.chord(x, y);
        const double* dp = dP.at(x, y);
        const double* a = A.at(x, y);
        const double* d = du.at(x, y);
        double q2 = 0.0, q3 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          q2 += dp[i * n + j] * a[i];
          double t = 0.0;
          for (std::size_t k = 0; k < n; ++k) t += dp[i * n + k] * d[k];
          q3 += P(y, i * n + j) * t;
        }
        r2 += q2 / (c * std::sqrt(c));
        r3 += q3 / c;
      }
      double diag = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double t = 0.0;
        for (std::size_t k = 0; k < n; ++k) t += dP.diagonal(x)[i * n + k] * du.diagonal(x)[k];
        diag += P(x, i * n + j) * t;
      }
      R.R2(x, j) = h * r2;
      R.R3(x, j) = h * (r3 + diag);
    }
  }
  return R;
}

Remainders remainders_R123(const Manifold& N, const GridFunction& u, const GridFunction& v,
                           const GridFunction& w, std::size_t gauss_order) {
  const CurvatureKernel A = A_u(N, u, v, w, gauss_order, SegmentPolicy::Strict);
  return remainders_R123(N, u, A.A);
}

double R1_functional(const OffDiagKernel& flux, const GridFunction& phi) {
  require(flux.grid().same_as(phi.grid()), ErrorKind::SizeMismatch, "R1_functional: grid mismatch");
  require(flux.components() == phi.components(), ErrorKind::SizeMismatch,
          "R1_functional: test function has wrong dimension");
  const CircleGrid& grid = phi.grid();
  const std::size_t M = grid.size();
  const double h = grid.spacing();
  const OffDiagKernel dphi = frac_gradient(phi, 0.5);
  double acc = 0.0;
  for (std::size_t x = 0; x < M; ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < M; ++y) {
      if (x == y) continue;
      double q = 0.0;
      for (std::size_t c = 0; c < phi.components(); ++c) q += flux(x, y, c) * dphi(x, y, c);
      row += q / grid.chord(x, y);
    }
    acc += row;
  }
  return acc * h * h;
}

double QuadraticCoefficients::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

QuadraticCoefficients P_quadratic_form(const Manifold& N, const Vec& p, const Vec& q,
                                       std::size_t gauss_order) {
  const std::size_t n = N.ambient_dim();
  require(static_cast<std::size_t>(p.size()) == n && static_cast<std::size_t>(q.size()) == n,
          ErrorKind::SizeMismatch, "P_quadratic_form: points have wrong dimension");
  const GaussRule& g = gauss_legendre(gauss_order);
  QuadraticCoefficients P;
  P.n = n;
  P.values.assign(n * n * n, 0.0);
  const Vec d = q - p;
  for (std::size_t a = 0; a < g.size(); ++a) {
    const double t = g.nodes[a];
    for (std::size_t b = 0; b < g.size(); ++b) {
      const double s = g.nodes[b];
      const Hessian H = N.hessian(p + (s * (1.0 - t)) * d);
      const double w = g.weights[a] * g.weights[b] * (t - 1.0);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l)
            P.values[(j * n + k) * n + l] += w * H.slice(j)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = k + 1; l < n; ++l) {
        const double sym = 0.5 * (P.values[(j * n + k) * n + l] + P.values[(j * n + l) * n + k]);
        P.values[(j * n + k) * n + l] = sym;
        P.values[(j * n + l) * n + k] = sym;
      }
  return P;
}

Vec P_contract(const Manifold& N, const Vec& p, const Vec& q, const Vec& a, std::size_t gauss_order) {
  const GaussRule& g = gauss_legendre(gauss_order);
  const std::size_t n = N.ambient_dim();
  require(static_cast<std::size_t>(p.size()) == n && static_cast<std::size_t>(q.size()) == n &&
              static_cast<std::size_t>(a.size()) == n,
          ErrorKind::SizeMismatch, "P_contract: points have wrong dimension");
  double pt[kMaxAmbient], val[kMaxAmbient];
  Vec acc = Vec::Zero(p.size());
  for (std::size_t ia = 0; ia < g.size(); ++ia) {
    const double t = g.nodes[ia];
    for (std::size_t ib = 0; ib < g.size(); ++ib) {
      const double s = g.nodes[ib] * (1.0 - t);
      for (std::size_t c = 0; c < n; ++c) {
        const Eigen::Index ci = static_cast<Eigen::Index>(c);
        pt[c] = p(ci) + s * (q(ci) - p(ci));
      }
      if (!N.try_hessian_contract(pt, a.data(), a.data(), val)) {
        fail(ErrorKind::OutsideTube, "P_contract: chord segment leaves the safe tube of the " + N.name());
      }
      const double w = g.weights[ia] * g.weights[ib] * (t - 1.0);
      for (std::size_t c = 0; c < n; ++c) acc(static_cast<Eigen::Index>(c)) += w * val[c];
    }
  }
  return acc;
}

HypersurfaceObjects hypersurface_objects(const Manifold& N, const GridFunction& u, std::size_t gauss_order) {
  require(N.is_hypersurface(), ErrorKind::NotAHypersurface,
          "hypersurface objects need a codimension-1 target, got the " + N.name());
  require_target_dimension(N, u, "hypersurface_objects");
  const GaussRule& g = gauss_legendre(gauss_order);
  const std::size_t M = u.size();
  const std::size_t n = u.components();
  const CircleGrid& grid = u.grid();
  const auto pts = node_points(u);
  const GridFunction uprime = derivative(u);

  HypersurfaceObjects out;
  out.normal = GridFunction(u.grid_ptr(), n);
  std::vector<Mat> dnu(M);
  for (std::size_t x = 0; x < M; ++x) {
    require(N.in_safe_tube(pts[x]), ErrorKind::OutsideTube, "hypersurface_objects: map left the safe tube");
    const Vec nu = N.extended_normal(pts[x]);
    for (std::size_t c = 0; c < n; ++c) out.normal(x, c) = nu(static_cast<Eigen::Index>(c));
    dnu[x] = N.extended_normal_jacobian(pts[x]);
  }

  out.A_tilde = OffDiagKernel(u.grid_ptr(), n * n);
  out.nu_u = OffDiagKernel(u.grid_ptr(), n);
  out.A_tilde_du = OffDiagKernel(u.grid_ptr(), n);
  OffDiagKernel flux(u.grid_ptr(), 1);
  const OffDiagKernel du = frac_gradient(u, 0.5);
  const Eigen::Index ni = static_cast<Eigen::Index>(n);
  for (std::size_t x = 0; x < M; ++x) {
    for (std::size_t y = 0; y < M; ++y) {
      if (x == y) continue;
      const Vec d = pts[x] - pts[y];
      Mat At = Mat::Zero(ni, ni);
      for (std::size_t b = 0; b < g.size(); ++b) {
        At += g.weights[b] * N.extended_normal_jacobian(pts[y] + g.nodes[b] * d);
      }
      double* a = out.A_tilde.at(x, y);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a[r * n + c] = At(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      // The segment integral of dnu applied to d is nu(u(x)) - nu(u(y)).
      const double inv = 1.0 / std::sqrt(grid.chord(x, y));
      double f = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        out.A_tilde_du(x, y, c) = (out.normal(x, c) - out.normal(y, c)) * inv;
        const double nu_avg = 0.5 * (out.normal(x, c) + out.normal(y, c));
        out.nu_u(x, y, c) = nu_avg;
        f += du(x, y, c) * nu_avg;
      }
      flux(x, y, 0) = f;
    }
  }
  out.A_tilde_du.enable_diagonal_limit();
  for (std::size_t x = 0; x < M; ++x) {
    Vec up(ni);
    for (std::size_t c = 0; c < n; ++c) up(static_cast<Eigen::Index>(c)) = uprime(x, c);
    const Vec lim = dnu[x] * up;
    for (std::size_t c = 0; c < n; ++c) out.A_tilde_du.diagonal(x)[c] = lim(static_cast<Eigen::Index>(c));
  }
  GridFunction lambda = od_pairing(du, out.A_tilde_du);
  lambda += frac_divergence(flux, 0.5);
  lambda *= 1.0 / duality_constant(0.5, M);
  out.lambda = lambda;
  return out;
}

}  // namespace hhflow
