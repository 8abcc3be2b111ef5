#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "hhflow/diagnostics.hpp"
#include "hhflow/error.hpp"
#include "hhflow/flow.hpp"
#include "hhflow/frac_calc.hpp"
#include "hhflow/initial_data.hpp"
#include "hhflow/spectral.hpp"
#include "test_support.hpp"

using namespace hhflow;
using namespace hhtest;

namespace {

GridFunction sphere_datum(std::size_t M, double eps, std::uint64_t seed) {
  return perturbation_datum(Manifold::sphere(3), build_grid(M), vec({0, 0, 1}), eps, seed);
}

/// 1/2 |(-Delta)^{1/4} u|^2 at every node by a naive O(M^2) Fourier sum,
/// valid for data without a Nyquist component.
std::vector<double> naive_density(const GridFunction& u) {
  const std::size_t M = u.size();
  const long half = static_cast<long>(M / 2);
  std::vector<double> out(M, 0.0);
  for (std::size_t c = 0; c < u.components(); ++c) {
    std::vector<std::complex<double>> coef;
    for (long k = -half + 1; k < half; ++k) {
      std::complex<double> s = 0.0;
      for (std::size_t j = 0; j < M; ++j) s += u(j, c) * std::polar(1.0, -static_cast<double>(k) * u.grid().node(j));
      coef.push_back(s / static_cast<double>(M));
    }
    for (std::size_t j = 0; j < M; ++j) {
      std::complex<double> v = 0.0;
      for (long k = -half + 1; k < half; ++k)
        v += std::sqrt(std::abs(static_cast<double>(k))) * coef[static_cast<std::size_t>(k + half - 1)] *
             std::polar(1.0, static_cast<double>(k) * u.grid().node(j));
      out[j] += 0.5 * v.real() * v.real();
    }
  }
  return out;
}

DiagnosticsRecord rec(double t, double E) {
  DiagnosticsRecord r;
  r.t = t;
  r.energy = E;
  return r;
}

}  // namespace

TEST_CASE("local energy against a naive windowed sum") {
  const GridFunction u = sphere_datum(64, 0.4, 7);
  const std::vector<double> dens = naive_density(u);
  const CircleGrid& g = u.grid();
  for (double x0 : {0.0, 1.234, 4.0})
    for (double R : {0.13, 0.55, 0.97}) {
      double want = 0.0;
      for (std::size_t j = 0; j < 64; ++j)
        if (chord_distance(g.node(j), x0) < R) want += dens[j];
      want *= g.spacing();
      CHECK(local_energy(u, x0, R) == doctest::Approx(want).epsilon(1e-10));
    }
  const GridFunction ed = energy_density(u);
  double total = 0.0;
  for (std::size_t j = 0; j < 64; ++j) total += ed(j, 0);
  CHECK(total * g.spacing() == doctest::Approx(energy_half(u)).epsilon(1e-12));
}

TEST_CASE("local energy examples") {
  const GridPtr g = build_grid(128);
  CHECK(local_energy(constant_datum(g, vec({0, 0, 1})), 0.3, 0.5) == 0.0);
  const GridFunction u = sphere_datum(128, 0.4, 3);
  const double E = energy_half(u);
  CHECK(local_energy(u, 0.0, 0.999) <= E);
  CHECK(local_energy(u, 0.0, 2.5) == doctest::Approx(E).epsilon(1e-12));

  const GridFunction circ = great_circle_datum(g, 3, 1);
  double lo = 1e300, hi = 0.0;
  for (std::size_t j = 0; j < 128; ++j) {
    const double e = local_energy(circ, g->node(j), 0.3);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  CHECK(hi - lo <= 1e-8);
  CHECK_THROWS_AS((void)local_energy(u, 0.0, 0.0), Error);
}

TEST_CASE("energy concentration") {
  const GridFunction u = sphere_datum(128, 0.4, 3);
  const double E = energy_half(u);
  double prev = 0.0;
  for (double R : {0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.5}) {
    const double e = energy_concentration(u, R);
    CHECK(e >= prev);
    CHECK(e <= E * (1.0 + 1e-14));
    prev = e;
  }
  CHECK(prev == doctest::Approx(E).epsilon(1e-12));

  // Boundary Moebius map: energy pi for every a, concentrated near x = 0.
  const GridFunction m = mobius_datum(build_grid(512), 2, 0.97);
  const double Em = energy_half(m);
  CHECK(Em == doctest::Approx(M_PI).epsilon(1e-10));
  CHECK(energy_concentration(m, 0.1) >= 0.9 * Em);
  CHECK(local_energy(m, 0.0, 0.1) == doctest::Approx(energy_concentration(m, 0.1)).epsilon(1e-12));
}

TEST_CASE("energy equals the paired fractional gradient") {
  const GridPtr g = build_grid(128);
  const GridFunction circ = great_circle_datum(g, 2, 1);
  CHECK(energy_half(circ) == doctest::Approx(M_PI).epsilon(1e-13));
  std::mt19937_64 rng(4);
  for (int t = 0; t < 3; ++t) {
    GridFunction u(g, 2);
    for (std::size_t c = 0; c < 2; ++c) {
      const GridFunction s = smooth_random(g, 12, rng);
      for (std::size_t j = 0; j < 128; ++j) u(j, c) = s(j, 0);
    }
    const GridFunction dens = od_pairing(frac_gradient(u, 0.5), frac_gradient(u, 0.5));
    double sq = 0.0;
    for (std::size_t j = 0; j < 128; ++j) sq += dens(j, 0);
    sq *= g->spacing();
    CHECK(energy_half(u) == doctest::Approx(sq / (2.0 * duality_constant(0.5, 128))).epsilon(2e-2));
  }
}

TEST_CASE("constraint violation") {
  const Manifold S1 = Manifold::sphere(2);
  const GridPtr g = build_grid(64);
  const GridFunction circ = great_circle_datum(g, 2, 1);
  CHECK(constraint_violation(S1, circ) <= 10 * S1.newton_tol());
  CHECK(constraint_violation(S1, 1.1 * circ) == doctest::Approx(0.01).epsilon(1e-12));

  const Manifold T = Manifold::torus(2.0, 0.5);
  const GridFunction ut = torus_loop_datum(T, g, 0.3, 0.4, 0.2, 0.6);
  CHECK(constraint_violation(T, ut) <= 10 * T.newton_tol());

  const GridFunction u = 1.02 * sphere_datum(64, 0.3, 1);
  GridFunction rolled(u.grid_ptr(), 3);
  for (std::size_t j = 0; j < 64; ++j)
    for (std::size_t c = 0; c < 3; ++c) rolled((j + 17) % 64, c) = u(j, c);
  CHECK(constraint_violation(Manifold::sphere(3), rolled) == constraint_violation(Manifold::sphere(3), u));

  CHECK_THROWS_AS((void)constraint_violation(S1, 0.2 * circ), Error);
}

TEST_CASE("reprojection keeps the constraint over 1000 steps") {
  const Manifold S = Manifold::sphere(3);
  SolverOptions opts;
  opts.dt = 1e-3;
  opts.t_end = 1.0;
  opts.reproject = true;
  EvolveOptions eo;
  eo.stride = 50;
  const Trajectory tr = evolve(sphere_datum(32, 0.3, 5), S, Formulation::Projection, opts, eo);
  CHECK(tr.final_state.step_count == 1000);
  for (const auto& r : tr.records) CHECK(r.constraint_violation <= 10 * S.newton_tol());
}

TEST_CASE("harmonic residual") {
  const Manifold S1 = Manifold::sphere(2);
  const GridPtr g = build_grid(128);
  CHECK(harmonic_residual(S1, great_circle_datum(g, 2, 1)) <= 1e-8);
  CHECK(harmonic_residual(S1, constant_datum(g, vec({1, 0}))) == 0.0);

  const Manifold S = Manifold::sphere(3);
  const GridFunction u = sphere_datum(128, 0.4, 2);
  const GridFunction L = frac_laplacian_spectral(u, 0.5);
  double acc = 0.0;
  for (std::size_t j = 0; j < 128; ++j) acc += (sphere_dpi(u.point(j)) * L.point(j)).squaredNorm();
  const double want = std::sqrt(acc * g->spacing());
  CHECK(harmonic_residual(S, u) == doctest::Approx(want).epsilon(1e-12));

  // The residual is the tangential part of the exact-flow velocity.
  const GridFunction v = flow_velocity(S, u, Formulation::Projection);
  double tv = 0.0;
  for (std::size_t j = 0; j < 128; ++j) tv += (sphere_dpi(u.point(j)) * v.point(j)).squaredNorm();
  CHECK(std::sqrt(tv * g->spacing()) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("energy decay check") {
  CHECK(energy_decay_check(std::vector<double>{1.0, 1.0, 1.0}, 0.0).pass);
  const EnergyDecayReport ok = energy_decay_check(std::vector<double>{3.0, 2.5, 2.0, 1.9}, 1e-6);
  CHECK(ok.pass);
  CHECK_FALSE(ok.first_violation.has_value());

  std::vector<DiagnosticsRecord> tr;
  for (int n = 0; n < 10; ++n) tr.push_back(rec(0.1 * n, 2.0 - 0.1 * n));
  tr[6].energy += 0.5;
  const EnergyDecayReport bad = energy_decay_check(tr, 1e-6);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.first_violation.has_value());
  CHECK(*bad.first_violation == 6);
  CHECK(bad.max_increase == doctest::Approx(0.4));
  CHECK(bad.message.find("record 6") != std::string::npos);

  // Slow creep above E(0) with every single step inside the tolerance.
  std::vector<double> creep;
  for (int n = 0; n < 20; ++n) creep.push_back(1.0 + 0.8e-6 * n);
  const EnergyDecayReport c = energy_decay_check(creep, 1e-6);
  CHECK_FALSE(c.pass);
  CHECK(*c.first_violation == 2);
  CHECK_FALSE(energy_decay_check(std::vector<double>{}, 1e-6).pass);
}

TEST_CASE("convergence detector") {
  const Manifold S = Manifold::sphere(3);
  SolverOptions opts;
  opts.dt = 1e-3;
  opts.t_end = 0.05;
  const Trajectory flat = evolve(constant_datum(build_grid(32), vec({0, 0, 1})), S, Formulation::Projection, opts);
  CHECK(convergence_detector(flat.records, 5).converged_to_point);

  const Manifold S1 = Manifold::sphere(2);
  const Trajectory id = evolve(great_circle_datum(build_grid(64), 2, 1), S1, Formulation::Projection, opts);
  const ConvergenceVerdict vi = convergence_detector(id.records, 10);
  CHECK_FALSE(vi.converged_to_point);
  CHECK(vi.sup_variation == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(vi.energy_slope) <= 1e-3);

  std::vector<DiagnosticsRecord> tr;
  for (int n = 0; n < 10; ++n) {
    DiagnosticsRecord r = rec(n, 1.0 - 0.05 * n);
    r.sup_variation = 0.5 - 0.05 * n;
    r.harmonic_residual = 0.2;
    tr.push_back(r);
  }
  const ConvergenceVerdict v = convergence_detector(tr, 4);
  CHECK(v.energy_slope == doctest::Approx(-0.05));
  CHECK(v.variation_slope == doctest::Approx(-0.05));
  CHECK(v.residual_slope == doctest::Approx(0.0).scale(1.0));
  CHECK_FALSE(v.converged_to_point);
  CHECK_THROWS_AS((void)convergence_detector(tr, 11), Error);
}

TEST_CASE("records") {
  const Manifold S = Manifold::sphere(3);
  const GridFunction u = sphere_datum(64, 0.2, 9);
  const DiagnosticsRecord r = make_record(S, u, 0.25, {0.1, 0.5});
  CHECK(r.t == 0.25);
  CHECK(r.energy >= 0.0);
  CHECK(r.energy == doctest::Approx(energy_half(u)).epsilon(1e-15));
  CHECK(r.constraint_violation >= 0.0);
  REQUIRE(r.eps_R.size() == 2);
  CHECK(r.eps_R[0] <= r.eps_R[1]);
  CHECK(r.eps_R[1] == doctest::Approx(energy_concentration(u, 0.5)).epsilon(1e-15));
  CHECK((r.mean_point - u.mean()).norm() == 0.0);
  CHECK(r.sup_variation == doctest::Approx(sup_variation(u)));
}
