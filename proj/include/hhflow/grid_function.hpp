#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>

#include "hhflow/circle_grid.hpp"

namespace hhflow {

/// Samples of u : S^1 -> R^n at the grid nodes. Row j holds u(x_j).
///
/// Matrix-valued fields (dpi(u), Omega, ...) are stored with n = rows * cols
/// components in row-major order per node.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(GridPtr grid, std::size_t components);
  GridFunction(GridPtr grid, Eigen::MatrixXd values);

  /// Sample f(x) at every node, one component.
  static GridFunction sample(GridPtr grid, const std::function<double(double)>& f);
  /// Sample a vector-valued map with `components` entries.
  static GridFunction sample(GridPtr grid, std::size_t components,
                             const std::function<void(double, double*)>& f);

  const CircleGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t components() const { return static_cast<std::size_t>(values_.cols()); }

  double operator()(std::size_t j, std::size_t c) const { return values_(j, c); }
  double& operator()(std::size_t j, std::size_t c) { return values_(j, c); }

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  Eigen::VectorXd point(std::size_t j) const { return values_.row(j).transpose(); }
  void set_point(std::size_t j, const Eigen::VectorXd& p) { values_.row(j) = p.transpose(); }

  GridFunction component(std::size_t c) const;

  bool all_finite() const { return values_.allFinite(); }

  /// Discrete L^2 norm sqrt(h * sum_j |u(x_j)|^2).
  double l2_norm() const;
  /// Discrete L^2 inner product h * sum_j u(x_j) . v(x_j).
  double dot(const GridFunction& other) const;
  double max_abs() const;
  /// Mean of u over S^1 (one value per component).
  Eigen::VectorXd mean() const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double a);

 private:
  GridPtr grid_;
  Eigen::MatrixXd values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double a, GridFunction f);
/// Node-wise product of two scalar fields, or scalar times vector field.
GridFunction pointwise_product(const GridFunction& a, const GridFunction& b);

/// Throws SizeMismatch if the two functions live on different grids.
void require_same_grid(const GridFunction& a, const GridFunction& b, const char* where);

/// Relative discrete L^2 difference |a - b| / |reference|.
double relative_l2(const GridFunction& a, const GridFunction& b, const GridFunction& reference);

}  // namespace hhflow
