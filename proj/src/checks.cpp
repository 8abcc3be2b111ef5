#include <chrono>
#include <cmath>
#include <random>

#include "hhflow/error.hpp"
#include "hhflow/flow.hpp"
#include "hhflow/frac_calc.hpp"
#include "hhflow/initial_data.hpp"
#include "hhflow/random.hpp"
#include "hhflow/runner.hpp"
#include "hhflow/spectral.hpp"

namespace hhflow {

namespace {

void add(CheckReport& rep, const std::string& name, double value, double threshold, const std::string& detail = "") {
  rep.checks.push_back({name, value, threshold, value <= threshold, detail});
}

GridFunction random_values(const GridPtr& g, std::size_t n, std::mt19937_64& rng) {
  GridFunction f(g, n);
  for (std::size_t j = 0; j < g->size(); ++j)
    for (std::size_t c = 0; c < n; ++c) f(j, c) = uniform_pm1(rng);
  return f;
}

/// Random trigonometric polynomial with modes |k| <= kmax.
GridFunction random_trig(const GridPtr& g, int kmax, std::mt19937_64& rng) {
  std::vector<double> a(static_cast<std::size_t>(kmax) + 1), b(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) {
    a[static_cast<std::size_t>(k)] = uniform_pm1(rng);
    b[static_cast<std::size_t>(k)] = uniform_pm1(rng);
  }
  return GridFunction::sample(g, [&](double x) {
    double v = 0.0;
    for (int k = 0; k <= kmax; ++k) v += a[static_cast<std::size_t>(k)] * std::cos(k * x) + b[static_cast<std::size_t>(k)] * std::sin(k * x);
    return v;
  });
}

double kernel_max(const OffDiagKernel& K) { return K.max_abs(); }

void identity_suite(CheckReport& rep, std::size_t M, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const GridPtr g = build_grid(M);

  for (int k : {1, 2, 3, 8}) {
    if (2 * static_cast<std::size_t>(k) >= M) continue;
    const GridFunction f = GridFunction::sample(g, [k](double x) { return std::cos(k * x); });
    const GridFunction want = static_cast<double>(k) * f;
    add(rep, "spectral_eigen_cos_k" + std::to_string(k), relative_l2(frac_laplacian_spectral(f, 0.5), want, want), 1e-12);
  }

  const GridFunction f = random_values(g, 1, rng);
  const GridFunction h = random_values(g, 1, rng);
  for (double s : {0.25, 0.5, 0.75}) {
    const OffDiagKernel dfg = frac_gradient(pointwise_product(f, h), s);
    add(rep, "leibniz_s" + format_number(s), kernel_max(leibniz_residual(f, h, s)) / std::max(1.0, kernel_max(dfg)), 1e-12);

    const OffDiagKernel df = frac_gradient(f, s);
    double anti = 0.0;
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < M; ++j) anti = std::max(anti, std::abs(df(i, j, 0) + df(j, i, 0)));
    add(rep, "antisymmetry_s" + format_number(s), anti / std::max(1.0, kernel_max(df)), 1e-12);

    OffDiagKernel G(g, 1);
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < M; ++j)
        if (i != j) G(i, j, 0) = uniform_pm1(rng);
    const double hh = g->spacing();
    double lhs = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < M; ++j) {
        if (i == j) continue;
        const double term = G(i, j, 0) * df(i, j, 0) * hh * hh / g->chord(i, j);
        lhs += term;
        scale += std::abs(term);
      }
    const double rhs = f.dot(frac_divergence(G, s));
    add(rep, "duality_adjoint_s" + format_number(s), std::abs(lhs - rhs) / std::max(1e-300, scale), 1e-12);
  }

  const GridFunction p = random_trig(g, static_cast<int>(M / 2) - 1, rng);
  const GridFunction Lp = frac_laplacian_spectral(p, 0.5);
  add(rep, "riesz_gradient_identity", relative_l2(riesz_transform(derivative(p)), Lp, Lp), 1e-12);

  const GridFunction cos1 = GridFunction::sample(g, [](double x) { return std::cos(x); });
  add(rep, "calibration_reproduces_cos", relative_l2(frac_laplacian_singular(cos1, 0.5), cos1, cos1), 1e-10);

  const GridFunction c = GridFunction::sample(g, [](double) { return 2.5; });
  const GridFunction smooth = random_trig(g, 6, rng);
  add(rep, "product_rule_constant_first", product_laplacian_residual(c, smooth).max_abs(), 1e-12);
  add(rep, "product_rule_constant_second", product_laplacian_residual(smooth, c).max_abs(), 1e-12);
  add(rep, "commutator_alt_constant_a", commutator_alt_residual(c, smooth).max_abs(), 1e-12);
  add(rep, "commutator_alt_both_constant", commutator_alt_residual(c, c).max_abs(), 1e-12);
}

/// Nearest point on the torus by nested dense sampling of (theta, phi) with
/// no derivative information.
Vec torus_dense_oracle(double R, double r, const Vec& p) {
  auto pt = [&](double th, double ph) {
    Vec q(3);
    q << (R + r * std::cos(ph)) * std::cos(th), (R + r * std::cos(ph)) * std::sin(th), r * std::sin(ph);
    return q;
  };
  double bt = 0.0, bp = 0.0, best = 1e300;
  const int n0 = 360;
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n0; ++b) {
      const double th = 2.0 * M_PI * a / n0, ph = 2.0 * M_PI * b / n0;
      const double d = (pt(th, ph) - p).squaredNorm();
      if (d < best) {
        best = d;
        bt = th;
        bp = ph;
      }
    }
  double span = 2.0 * M_PI / n0;
  for (int level = 0; level < 8; ++level) {
    const int m = 20;
    const double ct = bt, cp = bp;
    for (int a = -m; a <= m; ++a)
      for (int b = -m; b <= m; ++b) {
        const double th = ct + span * a / m, ph = cp + span * b / m;
        const double d = (pt(th, ph) - p).squaredNorm();
        if (d < best) {
          best = d;
          bt = th;
          bp = ph;
        }
      }
    span /= 8.0;
  }
  return pt(bt, bp);
}

void geometry_suite(CheckReport& rep, std::size_t M, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vec c0(3), n0(3);
  c0 << 0.1, -0.2, 0.3;
  n0 << 0.3, 0.4, 1.0;
  const std::vector<Manifold> targets = {Manifold::sphere(3), Manifold::ellipsoid({1.5, 1.0, 0.7}),
                                         Manifold::torus(2.0, 0.5), Manifold::embedded_circle(c0, n0, 1.2)};
  for (const Manifold& N : targets) {
    double idem = 0.0, sq = 0.0, sym = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Vec x = N.random_point(rng);
      Vec dir(static_cast<Eigen::Index>(N.ambient_dim()));
      for (Eigen::Index c = 0; c < dir.size(); ++c) dir(c) = uniform_pm1(rng);
      const Vec p = x + 0.2 * N.tube_radius() * dir / dir.norm();
      const Vec q = N.project(p);
      idem = std::max(idem, (N.project(q) - q).cwiseAbs().maxCoeff());
      const Mat J = N.jacobian(x);
      sq = std::max(sq, (J * J - J).cwiseAbs().maxCoeff());
      sym = std::max(sym, (J - J.transpose()).cwiseAbs().maxCoeff());
    }
    add(rep, N.name() + "_projection_idempotent", idem, 1e-9);
    add(rep, N.name() + "_dpi_squared", sq, 1e-6);
    add(rep, N.name() + "_dpi_symmetric", sym, 1e-6);
  }

  const Manifold S2 = Manifold::sphere(3);
  double jet = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Vec x = S2.random_point(rng);
    jet = std::max(jet, (S2.jacobian(x) - S2.fd_jet(x).jacobian).cwiseAbs().maxCoeff());
  }
  add(rep, "sphere_dpi_closed_form_vs_fd", jet, 1e-6);

  const Manifold T = Manifold::torus(2.0, 0.5);
  double brute = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Vec x = T.random_point(rng);
    Vec dir(3);
    for (Eigen::Index c = 0; c < 3; ++c) dir(c) = uniform_pm1(rng);
    const Vec p = x + 0.2 * dir / dir.norm();
    brute = std::max(brute, (T.project(p) - torus_dense_oracle(2.0, 0.5, p)).norm());
  }
  add(rep, "torus_projection_vs_dense_sampling", brute, 1e-6);

  const Manifold S1 = Manifold::sphere(2);
  const GridFunction id = great_circle_datum(build_grid(M), 2, 1);
  const TaylorResidual r16 = taylor_residual(S1, id, 16);
  const TaylorResidual r32 = taylor_residual(S1, id, 32);
  add(rep, "taylor_residual_gauss16", r16.max_abs, 1e-6,
      std::to_string(r16.flags.count) + " pairs outside the safe tube excluded");
  add(rep, "taylor_residual_gauss32_over_gauss16", r32.max_abs / std::max(1e-300, r16.max_abs), 0.5);
}

void crossform_suite(CheckReport& rep, std::size_t M, std::uint64_t seed) {
  const GridPtr g = build_grid(M);
  const Manifold S2 = Manifold::sphere(3);
  Vec p0(3);
  p0 << 0.0, 0.0, 1.0;
  const GridFunction u = perturbation_datum(S2, g, p0, 0.4, seed);

  const GridFunction rp = rhs_projection_form(S2, u);
  const GridFunction rd = rhs_divergence_form(S2, u);
  const GridFunction rq = rhs_quadratic_form(S2, u);
  const GridFunction rs = rhs_sphere_form(u);
  add(rep, "sphere_projection_vs_divergence", relative_l2(rd, rp, rp), 5e-2);
  add(rep, "sphere_projection_vs_quadratic", relative_l2(rq, rp, rp), 5e-2);
  add(rep, "sphere_divergence_vs_quadratic", relative_l2(rd, rq, rq), 5e-2);
  add(rep, "sphere_form_vs_projection", relative_l2(rs, rp, rp), 3e-2);

  const OffDiagKernel om = omega_potential(S2, u);
  double anti = 0.0;
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < M; ++j)
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) anti = std::max(anti, std::abs(om(i, j, a * 3 + b) + om(i, j, b * 3 + a)));
  add(rep, "omega_antisymmetric", anti, 1e-15);
  add(rep, "omega_zero_for_constant", omega_potential(S2, constant_datum(g, p0)).max_abs(), 1e-15);

  const CurvatureKernel A = A_u(S2, u, u, u);
  const Remainders R = remainders_R123(S2, u, A.A);
  const GridFunction assembled = omega_apply(om, u) + R.R1 + R.R2 + R.R3;
  const GridFunction target = duality_constant(0.5, M) * rd;
  add(rep, "omega_decomposition_reassembly", relative_l2(assembled, target, target), 3e-2);

  const Manifold T = Manifold::torus(2.0, 0.5);
  const GridFunction ut = torus_loop_datum(T, g, 0.3, 0.4, 0.2, 0.6);
  const GridFunction tp = rhs_projection_form(T, ut);
  add(rep, "torus_hypersurface_vs_projection", relative_l2(rhs_hypersurface_form(T, ut), tp, tp), 5e-2);
}

}  // namespace

CheckReport run_check(const std::string& suite, std::size_t M, std::uint64_t seed) {
  require(M >= 8 && M % 2 == 0, ErrorKind::InvalidArgument, "check: M must be an even integer >= 8");
  const auto t0 = std::chrono::steady_clock::now();
  CheckReport rep;
  rep.suite = suite;
  rep.M = M;
  rep.seed = seed;
  if (suite == "identity") {
    identity_suite(rep, M, seed);
  } else if (suite == "geometry") {
    geometry_suite(rep, M, seed);
  } else if (suite == "crossform") {
    crossform_suite(rep, M, seed);
  } else {
    fail(ErrorKind::InvalidArgument, "unknown check suite '" + suite + "' (identity, geometry, crossform)");
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace hhflow
