#include "hhflow/frac_calc.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "hhflow/error.hpp"

namespace hhflow {

namespace {

bool is_half(double s) { return std::abs(s - 0.5) < 1e-14; }

void require_singular_order(double s, const char* where) {
  require(s > 0.0 && s < 1.0, ErrorKind::InvalidArgument,
          std::string(where) + ": order s must lie in (0, 1)");
}

// h / chord(m h)^{power} for m = 0..M-1 (entry 0 unused).
std::vector<double> offset_weights(const CircleGrid& grid, double power) {
  const std::size_t M = grid.size();
  std::vector<double> w(M, 0.0);
  for (std::size_t m = 1; m < M; ++m) w[m] = grid.spacing() / std::pow(grid.chord_offset(m), power);
  return w;
}

class ConstantCache {
 public:
  template <class Compute>
  double get(double s, std::size_t M, Compute&& compute) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_pair(s, M);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    const double v = compute();
    values_.emplace(key, v);
    return v;
  }

  void set(double s, std::size_t M, double v) {
    std::lock_guard<std::mutex> lock(mutex_);
    values_[std::make_pair(s, M)] = v;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<double, std::size_t>, double> values_;
};

ConstantCache& disc_cache() {
  static ConstantCache c;
  return c;
}

ConstantCache& dual_cache() {
  static ConstantCache c;
  return c;
}

}  // namespace

double calibrate_constant(double s, std::size_t M) {
  require_singular_order(s, "calibrate_constant");
  require(M >= 8 && M % 2 == 0, ErrorKind::InvalidArgument, "calibrate_constant: M must be even and >= 8");
  return disc_cache().get(s, M, [&] {
    const CircleGrid grid(M);
    const auto w = offset_weights(grid, 1.0 + 2.0 * s);
    // singular_sum applied to cos at x = 0, same summation order.
    double acc = 0.0;
    for (std::size_t m = 1; m < M / 2; ++m) {
      const double x = grid.node(m);
      acc += (2.0 - std::cos(x) - std::cos(-x)) * w[m];
    }
    acc += 2.0 * w[M / 2];
    return 1.0 / acc;
  });
}

double duality_constant(double s, std::size_t M) {
  require_singular_order(s, "duality_constant");
  require(M >= 8 && M % 2 == 0, ErrorKind::InvalidArgument, "duality_constant: M must be even and >= 8");
  return dual_cache().get(s, M, [&] {
    auto grid = build_grid(M);
    const GridFunction f = GridFunction::sample(grid, [](double x) { return std::cos(x); });
    const GridFunction paired = od_pairing(frac_gradient(f, s), frac_gradient(f, s));
    const GridFunction spectral = frac_power_spectral(f, 0.5 * s);
    double lhs = 0.0;
    for (std::size_t j = 0; j < M; ++j) lhs += paired(j, 0) * grid->spacing();
    return lhs / spectral.dot(spectral);
  });
}

void install_constants(double s, std::size_t M, double c_disc, double c_dual) {
  require_singular_order(s, "install_constants");
  require(M >= 8 && M % 2 == 0, ErrorKind::InvalidArgument, "install_constants: M must be even and >= 8");
  require(std::isfinite(c_disc) && c_disc > 0.0 && std::isfinite(c_dual) && c_dual > 0.0, ErrorKind::InvalidArgument,
          "install_constants: constants must be positive and finite");
  disc_cache().set(s, M, c_disc);
  dual_cache().set(s, M, c_dual);
}

GridFunction singular_sum(const GridFunction& f, double s) {
  require_singular_order(s, "singular_sum");
  const CircleGrid& grid = f.grid();
  const std::size_t M = grid.size();
  const auto w = offset_weights(grid, 1.0 + 2.0 * s);
  GridFunction out(f.grid_ptr(), f.components());
  for (std::size_t c = 0; c < f.components(); ++c) {
    for (std::size_t i = 0; i < M; ++i) {
      const double fi = f(i, c);
      double acc = 0.0;
      for (std::size_t m = 1; m < M / 2; ++m) {
        acc += (2.0 * fi - f((i + m) % M, c) - f((i + M - m) % M, c)) * w[m];
      }
      acc += (fi - f((i + M / 2) % M, c)) * w[M / 2];
      out(i, c) = acc;
    }
  }
  return out;
}

GridFunction frac_laplacian_singular(const GridFunction& f, double s) {
  GridFunction out = singular_sum(f, s);
  out *= calibrate_constant(s, f.size());
  return out;
}

OffDiagKernel frac_gradient(const GridFunction& f, double s) {
  require(s >= 0.0 && s < 1.0, ErrorKind::InvalidArgument, "frac_gradient: s must lie in [0, 1)");
  const CircleGrid& grid = f.grid();
  const std::size_t M = grid.size();
  const std::size_t n = f.components();
  OffDiagKernel K(f.grid_ptr(), n);
  std::vector<double> inv(M, 0.0);
  for (std::size_t m = 1; m < M; ++m) inv[m] = 1.0 / std::pow(grid.chord_offset(m), s);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j) continue;
      const double w = inv[grid.offset(i, j)];
      double* k = K.at(i, j);
      for (std::size_t c = 0; c < n; ++c) k[c] = (f(i, c) - f(j, c)) * w;
    }
  }
  if (is_half(s)) {
    const GridFunction df = derivative(f);
    K.enable_diagonal_limit();
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t c = 0; c < n; ++c) K.diagonal(i)[c] = df(i, c);
  }
  return K;
}

GridFunction od_pairing(const OffDiagKernel& F, const OffDiagKernel& G) {
  require(F.grid().same_as(G.grid()), ErrorKind::SizeMismatch, "od_pairing: grid mismatch");
  require(F.components() == G.components(), ErrorKind::SizeMismatch,
          "od_pairing: component mismatch");
  const CircleGrid& grid = F.grid();
  const std::size_t M = grid.size();
  const std::size_t n = F.components();
  const double h = grid.spacing();
  const bool diag = F.has_diagonal_limit() && G.has_diagonal_limit();
  GridFunction out(F.grid_ptr(), 1);
  for (std::size_t i = 0; i < M; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j) continue;
      const double* a = F.at(i, j);
      const double* b = G.at(i, j);
      double dotp = 0.0;
      for (std::size_t c = 0; c < n; ++c) dotp += a[c] * b[c];
      acc += dotp / grid.chord(i, j);
    }
    acc *= h;
    if (diag) {
      double dotp = 0.0;
      for (std::size_t c = 0; c < n; ++c) dotp += F.diagonal(i)[c] * G.diagonal(i)[c];
      acc += h * dotp;
    }
    out(i, 0) = acc;
  }
  return out;
}

GridFunction od_pairing_matvec(const OffDiagKernel& F, const OffDiagKernel& G) {
  require(F.grid().same_as(G.grid()), ErrorKind::SizeMismatch, "od_pairing_matvec: grid mismatch");
  const std::size_t n = G.components();
  require(F.components() % n == 0, ErrorKind::SizeMismatch,
          "od_pairing_matvec: matrix kernel does not match vector kernel");
  const std::size_t rows = F.components() / n;
  const CircleGrid& grid = F.grid();
  const std::size_t M = grid.size();
  const double h = grid.spacing();
  const bool diag = F.has_diagonal_limit() && G.has_diagonal_limit();
  GridFunction out(F.grid_ptr(), rows);
  std::vector<double> acc(rows);
  for (std::size_t i = 0; i < M; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j) continue;
      const double* a = F.at(i, j);
      const double* b = G.at(i, j);
      const double inv = 1.0 / grid.chord(i, j);
      for (std::size_t r = 0; r < rows; ++r) {
        double dotp = 0.0;
        for (std::size_t k = 0; k < n; ++k) dotp += a[r * n + k] * b[k];
        acc[r] += dotp * inv;
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double v = acc[r] * h;
      if (diag) {
        double dotp = 0.0;
        for (std::size_t k = 0; k < n; ++k) dotp += F.diagonal(i)[r * n + k] * G.diagonal(i)[k];
        v += h * dotp;
      }
      out(i, r) = v;
    }
  }
  return out;
}

GridFunction od_norm(const OffDiagKernel& F) {
  GridFunction out = od_pairing(F, F);
  for (std::size_t i = 0; i < out.size(); ++i) out(i, 0) = std::sqrt(std::max(0.0, out(i, 0)));
  return out;
}

double od_lp_norm(const OffDiagKernel& F, double p) {
  require(p >= 1.0, ErrorKind::InvalidArgument, "od_lp_norm: p must be >= 1");
  const CircleGrid& grid = F.grid();
  const std::size_t M = grid.size();
  const double h = grid.spacing();
  double acc = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j) continue;
      double sq = 0.0;
      for (std::size_t c = 0; c < F.components(); ++c) sq += F(i, j, c) * F(i, j, c);
      acc += std::pow(std::sqrt(sq), p) * h * h / grid.chord(i, j);
    }
  }
  return std::pow(acc, 1.0 / p);
}

GridFunction frac_divergence(const OffDiagKernel& F, double s) {
  require(s >= 0.0 && s < 1.0, ErrorKind::InvalidArgument, "frac_divergence: s must lie in [0, 1)");
  const CircleGrid& grid = F.grid();
  const std::size_t M = grid.size();
  const std::size_t n = F.components();
  const double h = grid.spacing();
  std::vector<double> w(M, 0.0);
  for (std::size_t m = 1; m < M; ++m) w[m] = 1.0 / std::pow(grid.chord_offset(m), 1.0 + s);
  GridFunction out(F.grid_ptr(), n);
  std::vector<double> acc(n);
  for (std::size_t k = 0; k < M; ++k) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t j = 0; j < M; ++j) {
      if (j == k) continue;
      const double* a = F.at(k, j);
      const double* b = F.at(j, k);
      const double wk = w[grid.offset(k, j)];
      for (std::size_t c = 0; c < n; ++c) acc[c] += (a[c] - b[c]) * wk;
    }
    for (std::size_t c = 0; c < n; ++c) out(k, c) = acc[c] * h;
  }
  return out;
}

OffDiagKernel leibniz_residual(const GridFunction& f, const GridFunction& g, double s) {
  require_same_grid(f, g, "leibniz_residual");
  require(f.components() == 1 && g.components() == 1, ErrorKind::SizeMismatch,
          "leibniz_residual expects scalar f and g");
  const GridFunction fg = pointwise_product(f, g);
  const OffDiagKernel dfg = frac_gradient(fg, s);
  const OffDiagKernel df = frac_gradient(f, s);
  const OffDiagKernel dg = frac_gradient(g, s);
  const std::size_t M = f.size();
  OffDiagKernel res(f.grid_ptr(), 1);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j) continue;
      res(i, j, 0) = dfg(i, j, 0) - df(i, j, 0) * g(i, 0) - f(j, 0) * dg(i, j, 0);
    }
  }
  return res;
}

double product_rule_coefficient(std::size_t M) { return 2.0 / duality_constant(0.5, M); }

GridFunction product_laplacian_residual(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g, "product_laplacian_residual");
  require(f.components() == 1 && g.components() == 1, ErrorKind::SizeMismatch,
          "product_laplacian_residual expects scalar f and g");
  const GridFunction fg = pointwise_product(f, g);
  GridFunction res = frac_laplacian_singular(fg, 0.5);
  res -= pointwise_product(frac_laplacian_singular(f, 0.5), g);
  res -= pointwise_product(f, frac_laplacian_singular(g, 0.5));
  GridFunction cross = od_pairing(frac_gradient(f, 0.5), frac_gradient(g, 0.5));
  cross *= product_rule_coefficient(f.size());
  res += cross;
  return res;
}

GridFunction apply_matrix_field(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "apply_matrix_field");
  if (a.components() == 1) return pointwise_product(a, b);
  const std::size_t n = b.components();
  require(a.components() % n == 0, ErrorKind::SizeMismatch,
          "matrix field has " + std::to_string(a.components()) +
              " components, not a multiple of " + std::to_string(n));
  const std::size_t rows = a.components() / n;
  GridFunction out(a.grid_ptr(), rows);
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += a(j, r * n + k) * b(j, k);
      out(j, r) = acc;
    }
  }
  return out;
}

GridFunction commutator(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "commutator");
  GridFunction out = riesz_transform(apply_matrix_field(a, derivative(b)));
  out -= apply_matrix_field(a, frac_laplacian_spectral(b, 0.5));
  return out;
}

GridFunction commutator_alternate_form(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "commutator_alternate_form");
  const OffDiagKernel da = frac_gradient(a, 0.5);
  GridFunction cross;
  if (a.components() == 1) {
    cross = GridFunction(a.grid_ptr(), b.components());
    for (std::size_t c = 0; c < b.components(); ++c) {
      const GridFunction pc = od_pairing(da, frac_gradient(b.component(c), 0.5));
      for (std::size_t j = 0; j < a.size(); ++j) cross(j, c) = pc(j, 0);
    }
  } else {
    cross = od_pairing_matvec(da, frac_gradient(b, 0.5));
  }
  cross *= -product_rule_coefficient(a.size());
  GridFunction out = cross;
  out -= riesz_transform(apply_matrix_field(derivative(a), b));
  out += apply_matrix_field(frac_laplacian_singular(a, 0.5), b);
  return out;
}

GridFunction commutator_alt_residual(const GridFunction& a, const GridFunction& b) {
  return commutator(a, b) - commutator_alternate_form(a, b);
}

GridFunction gagliardo_density(const GridFunction& f, double s, double q) {
  require(s > 0.0 && s < 1.0, ErrorKind::InvalidArgument, "gagliardo: s must lie in (0, 1)");
  require(q >= 1.0 && std::isfinite(q), ErrorKind::InvalidArgument, "gagliardo: q must be finite and >= 1");
  const CircleGrid& grid = f.grid();
  const std::size_t M = grid.size();
  const double h = grid.spacing();
  const double power = s * q + 1.0;
  // Integrand |f(x)-f(y)|^q / |x-y|^{sq+1} ~ |f'|^q |x-y|^{q(1-s)-1}: it has a
  // finite nonzero limit on the diagonal only when q(1 - s) = 1.
  const bool diag = std::abs(q * (1.0 - s) - 1.0) < 1e-12;
  GridFunction df;
  if (diag) df = derivative(f);
  std::vector<double> w(M, 0.0);
  for (std::size_t m = 1; m < M; ++m) w[m] = h / std::pow(grid.chord_offset(m), power);
  GridFunction out(f.grid_ptr(), 1);
  for (std::size_t i = 0; i < M; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      if (i == j) continue;
      double sq = 0.0;
      for (std::size_t c = 0; c < f.components(); ++c) {
        const double d = f(i, c) - f(j, c);
        sq += d * d;
      }
      acc += std::pow(sq, 0.5 * q) * w[grid.offset(i, j)];
    }
    if (diag) {
      double sq = 0.0;
      for (std::size_t c = 0; c < f.components(); ++c) sq += df(i, c) * df(i, c);
      acc += h * std::pow(sq, 0.5 * q);
    }
    out(i, 0) = std::pow(acc, 1.0 / q);
  }
  return out;
}

double gagliardo_seminorm(const GridFunction& f, double s, double p, double q) {
  require(p >= 1.0, ErrorKind::InvalidArgument, "gagliardo: p must be >= 1");
  const GridFunction D = gagliardo_density(f, s, q);
  if (std::isinf(p)) return D.max_abs();
  double acc = 0.0;
  for (std::size_t i = 0; i < D.size(); ++i) acc += std::pow(D(i, 0), p);
  return std::pow(acc * f.grid().spacing(), 1.0 / p);
}

double energy_half(const GridFunction& u) {
  const SpectralField c = to_spectral(u);
  const std::size_t M = u.size();
  double acc = 0.0;
  for (std::size_t comp = 0; comp < c.components(); ++comp) {
    for (std::size_t r = 0; r < M; ++r) {
      const double k = std::abs(static_cast<double>(wavenumber(r, M)));
      acc += k * std::norm(c.coefficients()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(comp)));
    }
  }
  return std::numbers::pi * acc;
}

}  // namespace hhflow
