#pragma once

#include <cstddef>
#include <vector>

namespace hhflow {

/// Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// n-point rule, cached. Nodes from Newton iteration on P_n.
const GaussRule& gauss_legendre(std::size_t n);

}  // namespace hhflow
