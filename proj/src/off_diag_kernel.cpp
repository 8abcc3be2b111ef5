#include "hhflow/off_diag_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "hhflow/error.hpp"

namespace hhflow {

OffDiagKernel::OffDiagKernel(GridPtr grid, std::size_t components)
    : grid_(std::move(grid)), components_(components) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "OffDiagKernel needs a grid");
  require(components >= 1, ErrorKind::InvalidArgument, "OffDiagKernel needs >= 1 component");
  samples_.assign(grid_->size() * grid_->size() * components, 0.0);
}

double OffDiagKernel::max_abs() const {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace hhflow
