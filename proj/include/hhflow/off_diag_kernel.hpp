#pragma once

#include <cstddef>
#include <vector>

#include "hhflow/circle_grid.hpp"

namespace hhflow {

/// Sampled two-point function F(x_i, x_j) with `components` values per pair.
///
/// The measure dy/|x-y| is never baked into the samples; it is applied by the
/// pairings. `diag` holds, per node, the limit of F(x, y) / |x-y|^{1/2} as
/// y -> x (up to the sign of y - x, which cancels in products of two such
/// kernels). For d_{1/2} f this is f'(x). Pairings of two kernels that both
/// carry a diagonal limit add the missing node h * L_F * L_G.
class OffDiagKernel {
 public:
  OffDiagKernel() = default;
  OffDiagKernel(GridPtr grid, std::size_t components);

  const CircleGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return grid_->size(); }
  std::size_t components() const { return components_; }

  double* at(std::size_t i, std::size_t j) { return &samples_[(i * size() + j) * components_]; }
  const double* at(std::size_t i, std::size_t j) const {
    return &samples_[(i * size() + j) * components_];
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t c) { return at(i, j)[c]; }
  double operator()(std::size_t i, std::size_t j, std::size_t c) const { return at(i, j)[c]; }

  bool has_diagonal_limit() const { return !diag_.empty(); }
  void enable_diagonal_limit() { diag_.assign(size() * components_, 0.0); }
  void clear_diagonal_limit() { diag_.clear(); }
  double* diagonal(std::size_t i) { return &diag_[i * components_]; }
  const double* diagonal(std::size_t i) const { return &diag_[i * components_]; }

  const std::vector<double>& samples() const { return samples_; }

  /// max over pairs and components of |F|.
  double max_abs() const;

 private:
  GridPtr grid_;
  std::size_t components_ = 0;
  std::vector<double> samples_;
  std::vector<double> diag_;
};

}  // namespace hhflow
