#include "hhflow/grid_function.hpp"

#include <cmath>
#include <string>

#include "hhflow/error.hpp"

namespace hhflow {

GridFunction::GridFunction(GridPtr grid, std::size_t components)
    : grid_(std::move(grid)) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "GridFunction needs a grid");
  require(components >= 1, ErrorKind::InvalidArgument, "GridFunction needs >= 1 component");
  values_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid_->size()),
                                  static_cast<Eigen::Index>(components));
}

GridFunction::GridFunction(GridPtr grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "GridFunction needs a grid");
  require(static_cast<std::size_t>(values_.rows()) == grid_->size() && values_.cols() >= 1,
          ErrorKind::SizeMismatch,
          "GridFunction values have " + std::to_string(values_.rows()) +
              " rows for a grid of size " + std::to_string(grid_->size()));
}

GridFunction GridFunction::sample(GridPtr grid, const std::function<double(double)>& f) {
  GridFunction out(grid, 1);
  for (std::size_t j = 0; j < grid->size(); ++j) out(j, 0) = f(grid->node(j));
  return out;
}

GridFunction GridFunction::sample(GridPtr grid, std::size_t components,
                                  const std::function<void(double, double*)>& f) {
  GridFunction out(grid, components);
  std::vector<double> buf(components);
  for (std::size_t j = 0; j < grid->size(); ++j) {
    f(grid->node(j), buf.data());
    for (std::size_t c = 0; c < components; ++c) out(j, c) = buf[c];
  }
  return out;
}

GridFunction GridFunction::component(std::size_t c) const {
  return GridFunction(grid_, Eigen::MatrixXd(values_.col(static_cast<Eigen::Index>(c))));
}

double GridFunction::l2_norm() const { return std::sqrt(dot(*this)); }

double GridFunction::dot(const GridFunction& other) const {
  require_same_grid(*this, other, "GridFunction::dot");
  require(components() == other.components(), ErrorKind::SizeMismatch,
          "GridFunction::dot component mismatch");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < values_.rows(); ++j) {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) acc += values_(j, c) * other.values_(j, c);
  }
  return acc * grid_->spacing();
}

double GridFunction::max_abs() const { return values_.cwiseAbs().maxCoeff(); }

Eigen::VectorXd GridFunction::mean() const {
  return values_.colwise().sum().transpose() / static_cast<double>(values_.rows());
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same_grid(*this, o, "operator+=");
  require(components() == o.components(), ErrorKind::SizeMismatch, "operator+= component mismatch");
  values_ += o.values_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same_grid(*this, o, "operator-=");
  require(components() == o.components(), ErrorKind::SizeMismatch, "operator-= component mismatch");
  values_ -= o.values_;
  return *this;
}

GridFunction& GridFunction::operator*=(double a) {
  values_ *= a;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double a, GridFunction f) { return f *= a; }

GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "pointwise_product");
  if (a.components() == 1) {
    GridFunction out = b;
    for (std::size_t j = 0; j < b.size(); ++j)
      for (std::size_t c = 0; c < b.components(); ++c) out(j, c) *= a(j, 0);
    return out;
  }
  if (b.components() == 1) return pointwise_product(b, a);
  require(a.components() == b.components(), ErrorKind::SizeMismatch,
          "pointwise_product component mismatch");
  GridFunction out = a;
  out.values() = a.values().cwiseProduct(b.values());
  return out;
}

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* where) {
  require(a.grid().same_as(b.grid()), ErrorKind::SizeMismatch,
          std::string(where) + ": grid mismatch (" + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()) + ")");
}

double relative_l2(const GridFunction& a, const GridFunction& b, const GridFunction& reference) {
  const double denom = reference.l2_norm();
  const double num = (a - b).l2_norm();
  return denom > 0.0 ? num / denom : num;
}

}  // namespace hhflow
