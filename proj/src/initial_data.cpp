#include "hhflow/initial_data.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <complex>
#include <random>

#include "hhflow/error.hpp"
#include "hhflow/random.hpp"

namespace hhflow {

GridFunction perturbation_datum(const Manifold& N, const GridPtr& grid, const Vec& base_point, double epsilon,
                                std::uint64_t seed) {
  const std::size_t n = N.ambient_dim();
  require(static_cast<std::size_t>(base_point.size()) == n, ErrorKind::SizeMismatch,
          "perturbation: base point has wrong dimension");
  require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorKind::InvalidArgument, "perturbation: epsilon must be >= 0");
  std::mt19937_64 rng(seed);
  Vec a(static_cast<Eigen::Index>(n)), b(static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < n; ++c) a(static_cast<Eigen::Index>(c)) = uniform_pm1(rng);
  for (std::size_t c = 0; c < n; ++c) b(static_cast<Eigen::Index>(c)) = uniform_pm1(rng);
  const Vec p0 = N.closest_point(base_point);
  GridFunction u(grid, n);
  for (std::size_t j = 0; j < grid->size(); ++j) {
    const double x = grid->node(j);
    const Vec q = N.closest_point(p0 + epsilon * (std::cos(x) * a + std::sin(x) * b));
    for (std::size_t c = 0; c < n; ++c) u(j, c) = q(static_cast<Eigen::Index>(c));
  }
  return u;
}

GridFunction great_circle_datum(const GridPtr& grid, std::size_t n, int k) {
  require(n >= 2, ErrorKind::InvalidArgument, "great circle needs at least two components");
  return GridFunction::sample(grid, n, [n, k](double x, double* out) {
    for (std::size_t c = 0; c < n; ++c) out[c] = 0.0;
    out[0] = std::cos(k * x);
    out[1] = std::sin(k * x);
  });
}

GridFunction torus_loop_datum(const Manifold& torus, const GridPtr& grid, double theta0, double alpha,
                              double phi0, double beta) {
  require(torus.kind() == Manifold::Kind::Torus, ErrorKind::InvalidArgument, "torus_loop needs a torus target");
  const double R = torus.major_radius(), r = torus.minor_radius();
  return GridFunction::sample(grid, 3, [=](double x, double* out) {
    const double th = theta0 + alpha * std::cos(x);
    const double ph = phi0 + beta * std::sin(x);
    out[0] = (R + r * std::cos(ph)) * std::cos(th);
    out[1] = (R + r * std::cos(ph)) * std::sin(th);
    out[2] = r * std::sin(ph);
  });
}

GridFunction circle_loop_datum(const Manifold& circle, const GridPtr& grid, int k) {
  require(circle.kind() == Manifold::Kind::EmbeddedCircle, ErrorKind::InvalidArgument,
          "circle_loop needs an embedded circle target");
  const Vec nrm = circle.plane_normal();
  Vec e1 = nrm.unitOrthogonal();
  Vec e2(3);
  e2 << nrm(1) * e1(2) - nrm(2) * e1(1), nrm(2) * e1(0) - nrm(0) * e1(2), nrm(0) * e1(1) - nrm(1) * e1(0);
  const Vec c = circle.center();
  const double rho = circle.minor_radius();
  return GridFunction::sample(grid, 3, [=](double x, double* out) {
    const Vec p = c + rho * (std::cos(k * x) * e1 + std::sin(k * x) * e2);
    for (int i = 0; i < 3; ++i) out[i] = p(i);
  });
}

GridFunction mobius_datum(const GridPtr& grid, std::size_t n, double a) {
  require(n >= 2, ErrorKind::InvalidArgument, "Moebius datum needs at least two components");
  require(std::abs(a) < 1.0, ErrorKind::InvalidArgument, "Moebius parameter must satisfy |a| < 1");
  return GridFunction::sample(grid, n, [n, a](double x, double* out) {
    const std::complex<double> z = std::polar(1.0, x);
    const std::complex<double> w = (z - a) / (1.0 - a * z);
    for (std::size_t c = 0; c < n; ++c) out[c] = 0.0;
    out[0] = w.real();
    out[1] = w.imag();
  });
}

GridFunction constant_datum(const GridPtr& grid, const Vec& point) {
  const std::size_t n = static_cast<std::size_t>(point.size());
  return GridFunction::sample(grid, n, [&](double, double* out) {
    for (std::size_t c = 0; c < n; ++c) out[c] = point(static_cast<Eigen::Index>(c));
  });
}

}  // namespace hhflow
