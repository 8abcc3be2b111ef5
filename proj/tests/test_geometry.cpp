#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hhflow/error.hpp"
#include "hhflow/flow.hpp"
#include "hhflow/frac_calc.hpp"
#include "hhflow/geometry.hpp"
#include "hhflow/initial_data.hpp"
#include "hhflow/random.hpp"
#include "hhflow/spectral.hpp"
#include "test_support.hpp"

using namespace hhflow;
using namespace hhtest;

namespace {

Vec sphere_d2pi_contract(const Vec& p, const Vec& a, const Vec& b) {
  Vec out = Vec::Zero(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    for (Eigen::Index k = 0; k < p.size(); ++k)
      for (Eigen::Index l = 0; l < p.size(); ++l) out(i) += sphere_d2pi(p, i, k, l) * a(k) * b(l);
  return out;
}

GridFunction sphere_datum(std::size_t M, double eps, std::uint64_t seed) {
  return perturbation_datum(Manifold::sphere(3), build_grid(M), vec({0, 0, 1}), eps, seed);
}

double rel(const GridFunction& a, const GridFunction& ref) { return (a - ref).l2_norm() / ref.l2_norm(); }

}  // namespace

TEST_CASE("A_u vanishes when the data or one argument is constant") {
  const Manifold S = Manifold::sphere(3);
  const GridPtr g = build_grid(32);
  const GridFunction c = constant_datum(g, vec({0, 0.6, 0.8}));
  CHECK(A_u(S, c, c, c).A.max_abs() == 0.0);
  const GridFunction u = sphere_datum(32, 0.3, 5);
  CHECK(A_u(S, u, c, u).A.max_abs() == 0.0);
  CHECK(A_u(S, u, u, c).A.max_abs() == 0.0);
}

TEST_CASE("A_u matches a Simpson-rule evaluation of its defining integral") {
  const Manifold S = Manifold::sphere(3);
  const std::size_t M = 16;
  const GridFunction u = sphere_datum(M, 0.4, 9);
  std::mt19937_64 rng(12);
  const GridFunction v = random_nodes(u.grid_ptr(), 3, rng);
  const GridFunction w = random_nodes(u.grid_ptr(), 3, rng);
  const CurvatureKernel K = A_u(S, u, v, w);
  const int n = 200;
  for (auto [x, y] : {std::pair<std::size_t, std::size_t>{0, 3}, {5, 4}, {11, 2}, {7, 15}}) {
    const Vec ux = u.point(x), uy = u.point(y);
    const Vec dv = v.point(x) - v.point(y), dw = w.point(x) - w.point(y);
    Vec acc = Vec::Zero(3);
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) {
        const double s = static_cast<double>(a) / n, t = static_cast<double>(b) / n;
        const double ws = (a == 0 || a == n) ? 1.0 : (a % 2 ? 4.0 : 2.0);
        const double wt = (b == 0 || b == n) ? 1.0 : (b % 2 ? 4.0 : 2.0);
        const Vec q = (1.0 - t * s) * uy + t * s * ux;
        acc += ws * wt * t * sphere_d2pi_contract(q, dw, dv);
      }
    acc /= 9.0 * n * n;
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(K.A(x, y, static_cast<std::size_t>(i)) == doctest::Approx(acc(i)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("A_u is bilinear and symmetric") {
  const Manifold S = Manifold::sphere(3);
  const GridFunction u = sphere_datum(32, 0.3, 2);
  std::mt19937_64 rng(3);
  const GridFunction v = random_nodes(u.grid_ptr(), 3, rng);
  const GridFunction w = random_nodes(u.grid_ptr(), 3, rng);
  const OffDiagKernel base = A_u(S, u, v, w).A;
  const OffDiagKernel scaled = A_u(S, u, 2.0 * v, w).A;
  const OffDiagKernel swapped = A_u(S, u, w, v).A;
  double scale_err = 0.0, sym_err = 0.0;
  for (std::size_t k = 0; k < base.samples().size(); ++k) {
    scale_err = std::max(scale_err, std::abs(scaled.samples()[k] - 2.0 * base.samples()[k]));
    sym_err = std::max(sym_err, std::abs(swapped.samples()[k] - base.samples()[k]));
  }
  CHECK(scale_err == 0.0);
  CHECK(sym_err <= 1e-14 * std::max(1.0, base.max_abs()));
}

TEST_CASE("segments leaving the safe tube") {
  const Manifold S = Manifold::sphere(3);
  const GridFunction u = great_circle_datum(build_grid(16), 3, 1);
  try {
    (void)A_u(S, u, u, u);
    FAIL("expected OutsideTube");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutsideTube);
  }
  const CurvatureKernel K = A_u(S, u, u, u, kDefaultGaussOrder, SegmentPolicy::Flag);
  CHECK(K.flags.count > 0);
  CHECK(K.flags.is_excluded(0, 8));
  CHECK_FALSE(K.flags.is_excluded(0, 1));
  for (std::size_t c = 0; c < 3; ++c) CHECK(K.A(0, 8, c) == 0.0);
}

TEST_CASE("Taylor residual") {
  const Manifold S1 = Manifold::sphere(2);
  const GridPtr g = build_grid(64);
  CHECK(taylor_residual(S1, constant_datum(g, vec({0.6, 0.8}))).max_abs == 0.0);
  const GridFunction id = great_circle_datum(g, 2, 1);
  const TaylorResidual r16 = taylor_residual(S1, id, 16);
  const TaylorResidual r32 = taylor_residual(S1, id, 32);
  CHECK(r16.max_abs <= 1e-6);
  CHECK(r32.max_abs < r16.max_abs);
  CHECK(r16.flags.count < 64 * 64 / 2);

  // Off-sphere generic target with small oscillation: no pair is excluded.
  const Manifold E = Manifold::ellipsoid({1.5, 1.0, 0.7});
  const GridFunction ue = perturbation_datum(E, build_grid(32), vec({0, 0, 0.7}), 0.2, 4);
  const TaylorResidual re = taylor_residual(E, ue, 16);
  CHECK(re.flags.count == 0);
  CHECK(re.max_abs <= 1e-6);
}

TEST_CASE("B_u for constant data is the Hessian of pi") {
  const Manifold S = Manifold::sphere(3);
  const Vec p = vec({0.36, 0.48, 0.8});
  const GridFunction c = constant_datum(build_grid(16), p);
  // Constant data has zero-length segments; B_u is still the integrand mean.
  const OffDiagKernel B = B_u(S, c);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t l = 0; l < 3; ++l)
        CHECK(B(2, 9, (i * 3 + j) * 3 + l) ==
              doctest::Approx(sphere_d2pi(p, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j),
                                          static_cast<Eigen::Index>(l)))
                  .epsilon(1e-13)
                  .scale(1.0));
}

TEST_CASE("B_u contraction reproduces the paired leading term") {
  const Manifold S = Manifold::sphere(3);
  const std::size_t M = 256;
  const GridFunction u = sphere_datum(M, 0.4, 7);
  const OffDiagKernel B = B_u(S, u);
  const GridFunction via_B = leading_term(S, u, B);

  // Direct side: sum_i d u_i . d (Id - dpi(u))_{ij}, built from scalar kernels.
  GridFunction Q(u.grid_ptr(), 9);
  for (std::size_t x = 0; x < M; ++x) {
    const hhflow::Mat P = sphere_dpi(u.point(x));
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) Q(x, static_cast<std::size_t>(i * 3 + j)) = (i == j ? 1.0 : 0.0) - P(i, j);
  }
  GridFunction direct(u.grid_ptr(), 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const OffDiagKernel du = frac_gradient(u.component(i), 0.5);
    for (std::size_t j = 0; j < 3; ++j) {
      const GridFunction term = od_pairing(du, frac_gradient(Q.component(i * 3 + j), 0.5));
      for (std::size_t x = 0; x < M; ++x) direct(x, j) += term(x, 0);
    }
  }
  CHECK(rel(via_B, direct) <= 2e-2);
  CHECK(rel(leading_term_direct(S, u), direct) <= 1e-12);

  CHECK(B.max_abs() <= sphere_d2pi_sup_over_tube());
}

TEST_CASE("Omega potential") {
  const Manifold S = Manifold::sphere(3);
  const std::size_t M = 128;
  CHECK(omega_potential(S, constant_datum(build_grid(M), vec({0, 0, 1}))).max_abs() == 0.0);

  const GridFunction u = sphere_datum(M, 0.4, 7);
  const OffDiagKernel om = omega_potential(S, u);
  double anti = 0.0;
  for (std::size_t x = 0; x < M; ++x)
    for (std::size_t y = 0; y < M; ++y)
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) anti = std::max(anti, std::abs(om(x, y, a * 3 + b) + om(x, y, b * 3 + a)));
  CHECK(anti == 0.0);

  // The term before the antisymmetric split, evaluated straight from its
  // definition: sum_y sum_{i,k} dQ_{ij} dpi(u(y))_{ik} du_k h / |x - y|, with
  // the diagonal node supplied by spectral derivatives.
  const CircleGrid& grid = u.grid();
  const double h = grid.spacing();
  std::vector<hhflow::Mat> P(M), Q(M);
  GridFunction Qf(u.grid_ptr(), 9);
  for (std::size_t x = 0; x < M; ++x) {
    P[x] = sphere_dpi(u.point(x));
    Q[x] = hhflow::Mat::Identity(3, 3) - P[x];
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) Qf(x, static_cast<std::size_t>(i * 3 + j)) = Q[x](i, j);
  }
  const GridFunction du_dx = derivative(u);
  const GridFunction dQ_dx = derivative(Qf);
  GridFunction pre(u.grid_ptr(), 3);
  for (std::size_t x = 0; x < M; ++x)
    for (Eigen::Index j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (std::size_t y = 0; y < M; ++y) {
        if (y == x) continue;
        const double c = grid.chord(x, y);
        const Vec d = (u.point(x) - u.point(y)) / std::sqrt(c);
        for (Eigen::Index i = 0; i < 3; ++i) {
          const double dq = (Q[x](i, j) - Q[y](i, j)) / std::sqrt(c);
          acc += dq * (P[y].row(i).dot(d)) / c;
        }
      }
      double diag = 0.0;
      for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index k = 0; k < 3; ++k)
          diag += dQ_dx(x, static_cast<std::size_t>(i * 3 + j)) * P[x](i, k) * du_dx(x, static_cast<std::size_t>(k));
      pre(x, static_cast<std::size_t>(j)) = h * (acc + diag);
    }
  const Remainders R = remainders_R123(S, u, u, u);
  CHECK(rel(omega_apply(om, u) + R.R3, pre) <= 2e-2);

  // Reassembly against the projection-form right-hand side, scaled to the
  // pairing normalization.
  const GridFunction target = duality_constant(0.5, M) * rhs_projection_form(S, u);
  CHECK(rel(omega_apply(om, u) + R.R1 + R.R2 + R.R3, target) <= 3e-2);
}

TEST_CASE("remainders") {
  const Manifold S = Manifold::sphere(3);
  const GridPtr g = build_grid(64);
  const GridFunction c = constant_datum(g, vec({0.6, 0, 0.8}));
  const Remainders Rc = remainders_R123(S, c, c, c);
  CHECK(Rc.R1.max_abs() == 0.0);
  CHECK(Rc.R2.max_abs() == 0.0);
  CHECK(Rc.R3.max_abs() == 0.0);

  const std::size_t M = 256;
  const GridFunction u = sphere_datum(M, 0.4, 7);
  const OffDiagKernel A = A_u(S, u, u, u).A;
  const OffDiagKernel F = remainder_flux(S, u, A);
  const Remainders R = remainders_R123(S, u, A);
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int t = 0; t < 4; ++t) {
    GridFunction phi(u.grid_ptr(), 3);
    for (std::size_t k = 0; k < 3; ++k) {
      const GridFunction s = smooth_random(u.grid_ptr(), 6, rng);
      for (std::size_t x = 0; x < M; ++x) phi(x, k) = s(x, 0);
    }
    const double dual = R1_functional(F, phi);
    const double pointwise = R.R1.dot(phi);
    worst = std::max(worst, std::abs(dual - pointwise) / std::max(1e-300, R.R1.l2_norm() * phi.l2_norm()));
  }
  CHECK(worst <= 2e-2);
}

TEST_CASE("quadratic-form coefficients") {
  const Manifold S = Manifold::sphere(3);
  std::mt19937_64 rng(10);
  const double sup = sphere_d2pi_sup_over_tube();
  for (int t = 0; t < 10; ++t) {
    const Vec p = S.random_point(rng);
    const QuadraticCoefficients P = P_quadratic_form(S, p, p);
    for (Eigen::Index j = 0; j < 3; ++j)
      for (Eigen::Index k = 0; k < 3; ++k)
        for (Eigen::Index l = 0; l < 3; ++l)
          CHECK(P(static_cast<std::size_t>(j), static_cast<std::size_t>(k), static_cast<std::size_t>(l)) ==
                doctest::Approx(-0.5 * sphere_d2pi(p, j, k, l)).epsilon(1e-12).scale(1.0));
    Vec d(3);
    for (Eigen::Index c = 0; c < 3; ++c) d(c) = uniform_pm1(rng);
    const Vec q = S.project(p + 0.3 * d / d.norm());
    const QuadraticCoefficients Pq = P_quadratic_form(S, p, q);
    CHECK(Pq.max_abs() <= 0.5 * sup);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l) CHECK(Pq(j, k, l) == doctest::Approx(Pq(j, l, k)).epsilon(1e-14).scale(1.0));
    Vec sum = Vec::Zero(3);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l) sum(static_cast<Eigen::Index>(j)) += Pq(j, k, l) * d(static_cast<Eigen::Index>(k)) * d(static_cast<Eigen::Index>(l));
    CHECK((P_contract(S, p, q, d) - sum).norm() <= 1e-12);
  }
  const Manifold T = Manifold::torus(2.0, 0.5);
  const Vec x = T.random_point(rng);
  const QuadraticCoefficients PT = P_quadratic_form(T, x, x);
  const Hessian H = T.hessian(x);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t l = 0; l < 3; ++l)
        CHECK(PT(j, k, l) ==
              doctest::Approx(-0.5 * H.slice(j)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)))
                  .epsilon(1e-6)
                  .scale(1.0));
}

TEST_CASE("hypersurface objects") {
  const Manifold S = Manifold::sphere(3);
  const Vec p = vec({0, 0.6, 0.8});
  const HypersurfaceObjects hc = hypersurface_objects(S, constant_datum(build_grid(32), p));
  CHECK(hc.lambda.max_abs() == 0.0);
  const hhflow::Mat dnu = sphere_dpi(p);  // d(p / |p|)
  for (Eigen::Index a = 0; a < 3; ++a)
    for (Eigen::Index b = 0; b < 3; ++b)
      CHECK(hc.A_tilde(3, 20, static_cast<std::size_t>(a * 3 + b)) == doctest::Approx(dnu(a, b)).epsilon(1e-12).scale(1.0));

  const std::size_t M = 256;
  const GridFunction u = great_circle_datum(build_grid(M), 3, 1);
  const HypersurfaceObjects ho = hypersurface_objects(S, u);
  GridFunction lam_nu(u.grid_ptr(), 3);
  for (std::size_t x = 0; x < M; ++x)
    for (std::size_t c = 0; c < 3; ++c) lam_nu(x, c) = ho.lambda(x, 0) * ho.normal(x, c);
  // (Id - dpi(u)) (-Delta)^{1/2} u for u = (cos, sin, 0) is u itself.
  CHECK(rel(lam_nu, u) <= 3e-2);

  // Pointwise bound |du . A du| <= |A|_inf |du|^2 with the Frobenius norm.
  const GridFunction w = sphere_datum(128, 0.4, 3);
  const HypersurfaceObjects hw = hypersurface_objects(S, w);
  double sup = 0.0;
  for (std::size_t x = 0; x < 128; ++x) {
    for (std::size_t y = 0; y < 128; ++y) {
      if (x == y) continue;
      double f = 0.0;
      for (std::size_t c = 0; c < 9; ++c) f += hw.A_tilde(x, y, c) * hw.A_tilde(x, y, c);
      sup = std::max(sup, std::sqrt(f));
    }
    sup = std::max(sup, S.extended_normal_jacobian(w.point(x)).norm());
  }
  const OffDiagKernel dw = frac_gradient(w, 0.5);
  const GridFunction lhs = od_pairing(dw, hw.A_tilde_du);
  const GridFunction n2 = od_pairing(dw, dw);
  for (std::size_t x = 0; x < 128; ++x) CHECK(std::abs(lhs(x, 0)) <= sup * n2(x, 0) * (1.0 + 1e-12));
}

TEST_CASE("codimension-two target rejects hypersurface objects") {
  const Manifold C = Manifold::embedded_circle(vec({0, 0, 0}), vec({0, 0, 1}), 1.0);
  const GridFunction u = circle_loop_datum(C, build_grid(16), 1);
  try {
    (void)hypersurface_objects(C, u);
    FAIL("expected NotAHypersurface");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotAHypersurface);
  }
}

TEST_CASE("projector fields") {
  const Manifold S = Manifold::sphere(3);
  const GridFunction u = sphere_datum(32, 0.3, 1);
  const GridFunction P = projector_field(S, u);
  const GridFunction Q = complementary_projector_field(S, u);
  for (std::size_t x = 0; x < 32; ++x) {
    const hhflow::Mat want = sphere_dpi(u.point(x));
    for (Eigen::Index a = 0; a < 3; ++a)
      for (Eigen::Index b = 0; b < 3; ++b) {
        CHECK(P(x, static_cast<std::size_t>(a * 3 + b)) == doctest::Approx(want(a, b)).epsilon(1e-14).scale(1.0));
        CHECK(P(x, static_cast<std::size_t>(a * 3 + b)) + Q(x, static_cast<std::size_t>(a * 3 + b)) ==
              doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-15).scale(1.0));
      }
  }
  try {
    (void)projector_field(S, great_circle_datum(build_grid(16), 2, 1));
    FAIL("expected SizeMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SizeMismatch);
  }
}
