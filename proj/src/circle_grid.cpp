#include "hhflow/circle_grid.hpp"

#include <cmath>
#include <string>

#include "hhflow/error.hpp"

namespace hhflow {

double canonical_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double chord_distance(double x, double y) {
  const double d = canonical_angle(x) - canonical_angle(y);
  return std::abs(2.0 * std::sin(0.5 * d));
}

CircleGrid::CircleGrid(std::size_t M) {
  require(M >= 8 && M % 2 == 0, ErrorKind::InvalidArgument,
          "grid size M must be even and >= 8 (got " + std::to_string(M) + ")");
  h_ = kTwoPi / static_cast<double>(M);
  nodes_.resize(M);
  chord_by_offset_.resize(M);
  for (std::size_t j = 0; j < M; ++j) {
    nodes_[j] = h_ * static_cast<double>(j);
  }
  // Fill symmetric offsets from the same value so chord(i,j) == chord(j,i)
  // holds bit-exactly.
  chord_by_offset_[0] = 0.0;
  for (std::size_t m = 1; m <= M / 2; ++m) {
    const double c = 2.0 * std::sin(0.5 * h_ * static_cast<double>(m));
    chord_by_offset_[m] = c;
    chord_by_offset_[M - m] = c;
  }
  chord_by_offset_[M / 2] = 2.0;
}

GridPtr build_grid(std::size_t M) { return std::make_shared<const CircleGrid>(M); }

}  // namespace hhflow
