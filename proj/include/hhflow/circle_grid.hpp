#pragma once

#include <cstddef>
#include <memory>
#include <numbers>
#include <vector>

namespace hhflow {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Chord distance on S^1 = R / 2piZ: |x - y| = 2 |sin((x - y) / 2)|.
/// Both angles are reduced to [0, 2pi) first.
double chord_distance(double x, double y);

/// Reduce an angle to [0, 2pi).
double canonical_angle(double x);

/// Uniform periodic grid x_j = 2 pi j / M on the unit circle.
///
/// The grid also caches the chord distances by index offset, which is all the
/// kernels need: chord(x_i, x_j) depends only on (j - i) mod M.
class CircleGrid {
 public:
  /// Throws InvalidArgument unless M is even and at least 8.
  explicit CircleGrid(std::size_t M);

  std::size_t size() const noexcept { return nodes_.size(); }
  double spacing() const noexcept { return h_; }
  double node(std::size_t j) const { return nodes_[j]; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }

  /// chord(x_i, x_j); zero on the diagonal.
  double chord(std::size_t i, std::size_t j) const {
    return chord_by_offset_[offset(i, j)];
  }
  /// chord for index offset m in [0, M).
  double chord_offset(std::size_t m) const { return chord_by_offset_[m]; }

  std::size_t offset(std::size_t i, std::size_t j) const noexcept {
    return j >= i ? j - i : j + size() - i;
  }

  bool same_as(const CircleGrid& other) const noexcept {
    return size() == other.size();
  }

 private:
  double h_;
  std::vector<double> nodes_;
  std::vector<double> chord_by_offset_;
};

using GridPtr = std::shared_ptr<const CircleGrid>;

GridPtr build_grid(std::size_t M);

}  // namespace hhflow
