#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>

#include "hhflow/grid_function.hpp"

namespace hhflow {

/// Fourier coefficients c(k) = (1/M) sum_j f(x_j) e^{-i k x_j}, stored per
/// component in FFT order: row r holds wavenumber wavenumber(r, M), which runs
/// 0, 1, ..., M/2 - 1, -M/2, ..., -1.
class SpectralField {
 public:
  SpectralField(GridPtr grid, Eigen::MatrixXcd coefficients);

  const CircleGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return static_cast<std::size_t>(coeffs_.rows()); }
  std::size_t components() const { return static_cast<std::size_t>(coeffs_.cols()); }

  const Eigen::MatrixXcd& coefficients() const { return coeffs_; }
  Eigen::MatrixXcd& coefficients() { return coeffs_; }

  /// Coefficient of wavenumber k in [-M/2, M/2 - 1].
  std::complex<double> at(long k, std::size_t component = 0) const;

 private:
  GridPtr grid_;
  Eigen::MatrixXcd coeffs_;
};

/// Signed wavenumber of FFT row r for a grid of size M.
inline long wavenumber(std::size_t r, std::size_t M) {
  return r < M / 2 ? static_cast<long>(r) : static_cast<long>(r) - static_cast<long>(M);
}

SpectralField to_spectral(const GridFunction& f);
GridFunction from_spectral(const SpectralField& c);

/// Apply the Fourier multiplier k -> m(k) to every component and return the
/// real part of the result. The Nyquist row is passed k = -M/2.
GridFunction apply_multiplier(const GridFunction& f,
                              const std::function<std::complex<double>(long)>& multiplier);

/// (-Delta)^s f with multiplier |k|^{2s}. Requires s in (0, 1].
GridFunction frac_laplacian_spectral(const GridFunction& f, double s);

/// Spectral multiplier |k|^{2s} for any s > 0; used for (-Delta)^{1/4} and
/// for composition tests. frac_laplacian_spectral restricts s further.
GridFunction frac_power_spectral(const GridFunction& f, double s);

/// d/dx with multiplier i k, Nyquist mode zeroed.
GridFunction derivative(const GridFunction& f);

/// Riesz-Hilbert transform, multiplier -i sign(k), zero and Nyquist modes zeroed.
/// With this sign, riesz_transform(derivative(f)) = (-Delta)^{1/2} f.
GridFunction riesz_transform(const GridFunction& f);

}  // namespace hhflow
