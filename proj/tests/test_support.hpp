#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "hhflow/grid_function.hpp"
#include "hhflow/manifold.hpp"

namespace hhtest {

using hhflow::GridFunction;
using hhflow::GridPtr;
using hhflow::Vec;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline GridFunction scalar(const GridPtr& g, const std::function<double(double)>& f) {
  return GridFunction::sample(g, f);
}

inline double rel_l2(const GridFunction& a, const GridFunction& b) {
  return (a - b).l2_norm() / b.l2_norm();
}

/// Smooth random trigonometric polynomial of degree kmax with decaying modes.
inline GridFunction smooth_random(const GridPtr& g, int kmax, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> a(kmax + 1), b(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    a[k] = U(rng) / (1.0 + k * k);
    b[k] = U(rng) / (1.0 + k * k);
  }
  return GridFunction::sample(g, [=](double x) {
    double v = 0.0;
    for (int k = 0; k <= kmax; ++k) v += a[k] * std::cos(k * x) + b[k] * std::sin(k * x);
    return v;
  });
}

inline GridFunction random_nodes(const GridPtr& g, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  GridFunction f(g, n);
  for (std::size_t j = 0; j < g->size(); ++j)
    for (std::size_t c = 0; c < n; ++c) f(j, c) = U(rng);
  return f;
}

/// (-Delta)^{1/2} exp(cos x) = 2 sum_k k I_k(1) cos(kx), from the generating
/// function of the modified Bessel functions.
inline double half_laplacian_exp_cos(double x) {
  double v = 0.0;
  for (int k = 1; k <= 40; ++k) v += 2.0 * k * std::cyl_bessel_i(static_cast<double>(k), 1.0) * std::cos(k * x);
  return v;
}

/// Closest point on the torus (R, r) by exhaustive sampling of the
/// parametrisation, followed by successively finer local sample grids.
inline Vec torus_brute_force(double R, double r, const Vec& p) {
  auto pt = [&](double th, double ph) {
    return vec({(R + r * std::cos(ph)) * std::cos(th), (R + r * std::cos(ph)) * std::sin(th), r * std::sin(ph)});
  };
  double bt = 0.0, bp = 0.0, best = 1e300;
  const int n0 = 400;
  for (int a = 0; a < n0; ++a)
    for (int b = 0; b < n0; ++b) {
      const double th = 2.0 * M_PI * a / n0, ph = 2.0 * M_PI * b / n0;
      const double d = (pt(th, ph) - p).squaredNorm();
      if (d < best) best = d, bt = th, bp = ph;
    }
  double span = 4.0 * M_PI / n0;
  for (int level = 0; level < 10; ++level) {
    const double ct = bt, cp = bp;
    for (int a = -16; a <= 16; ++a)
      for (int b = -16; b <= 16; ++b) {
        const double th = ct + span * a / 16.0, ph = cp + span * b / 16.0;
        const double d = (pt(th, ph) - p).squaredNorm();
        if (d < best) best = d, bt = th, bp = ph;
      }
    span /= 6.0;
  }
  return pt(bt, bp);
}

/// dpi on the unit sphere: (I - p p^T / |p|^2) / |p|.
inline hhflow::Mat sphere_dpi(const Vec& p) {
  const double r = p.norm();
  const Eigen::Index n = p.size();
  hhflow::Mat J = hhflow::Mat::Identity(n, n);
  J -= p * p.transpose() / (r * r);
  return J / r;
}

/// d_k d_l pi_i for pi(p) = p / |p|, written out by hand.
inline double sphere_d2pi(const Vec& p, Eigen::Index i, Eigen::Index k, Eigen::Index l) {
  const double r = p.norm();
  const double r3 = r * r * r;
  auto dl = [](Eigen::Index a, Eigen::Index b) { return a == b ? 1.0 : 0.0; };
  return -(dl(i, l) * p(k) + dl(i, k) * p(l) + dl(k, l) * p(i)) / r3 + 3.0 * p(i) * p(k) * p(l) / (r3 * r * r);
}

/// Largest |d_k d_l pi_i| over the safe tube |r - 1| < 0.45 of the unit
/// sphere in R^3. The entries are homogeneous of degree -2 in p, so the
/// inner radius dominates; the unit-sphere maximum is sampled densely and
/// padded by 2%.
inline double sphere_d2pi_sup_over_tube() {
  double m = 0.0;
  const int n = 120;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b < 2 * n; ++b) {
      const double th = M_PI * a / n, ph = M_PI * b / n;
      Vec p(3);
      p << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
      for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index k = 0; k < 3; ++k)
          for (Eigen::Index l = 0; l < 3; ++l) m = std::max(m, std::abs(sphere_d2pi(p, i, k, l)));
    }
  return 1.02 * m / (0.55 * 0.55);
}

}  // namespace hhtest
