#pragma once

#include <cstdint>
#include <vector>

#include "hhflow/grid_function.hpp"
#include "hhflow/manifold.hpp"

namespace hhflow {

/// pi(p0 + eps (a cos x + b sin x)) with a, b drawn uniformly from [-1, 1]^n
/// by a mt19937_64 seeded with `seed`.
GridFunction perturbation_datum(const Manifold& N, const GridPtr& grid, const Vec& base_point, double epsilon,
                                std::uint64_t seed);

/// (cos kx, sin kx, 0, ...) in R^n.
GridFunction great_circle_datum(const GridPtr& grid, std::size_t n, int k);

/// theta = theta0 + alpha cos x, phi = phi0 + beta sin x on the torus.
GridFunction torus_loop_datum(const Manifold& torus, const GridPtr& grid, double theta0, double alpha,
                              double phi0, double beta);

/// The embedded circle traversed k times.
GridFunction circle_loop_datum(const Manifold& circle, const GridPtr& grid, int k);

/// Boundary Moebius map z -> (z - a) / (1 - a z), |a| < 1, in the first two
/// coordinates of R^n. Half-harmonic of degree one with energy pi; its
/// gradient concentrates near x = 0 as a -> 1.
GridFunction mobius_datum(const GridPtr& grid, std::size_t n, double a);

GridFunction constant_datum(const GridPtr& grid, const Vec& point);

}  // namespace hhflow
