#include "hhflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "hhflow/error.hpp"

namespace hhflow {

namespace {

// FFTW plans are cached per size. Plan creation is not thread-safe in FFTW,
// so the cache is guarded; execution with fftw_execute_dft on unaligned
// buffers is safe to call concurrently.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  PlanPair get(std::size_t n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> a(n), b(n);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, flags);
    plans_.emplace(n, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(fftw_plan plan, std::complex<double>* in, std::complex<double>* out) {
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

SpectralField::SpectralField(GridPtr grid, Eigen::MatrixXcd coefficients)
    : grid_(std::move(grid)), coeffs_(std::move(coefficients)) {
  require(static_cast<std::size_t>(coeffs_.rows()) == grid_->size(), ErrorKind::SizeMismatch,
          "SpectralField size does not match grid");
}

std::complex<double> SpectralField::at(long k, std::size_t component) const {
  const long M = static_cast<long>(size());
  require(k >= -M / 2 && k < M / 2, ErrorKind::InvalidArgument, "wavenumber out of range");
  const long r = k >= 0 ? k : k + M;
  return coeffs_(r, static_cast<Eigen::Index>(component));
}

SpectralField to_spectral(const GridFunction& f) {
  const std::size_t M = f.size();
  const PlanPair plans = plan_cache().get(M);
  Eigen::MatrixXcd coeffs(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(f.components()));
  std::vector<std::complex<double>> in(M), out(M);
  const double scale = 1.0 / static_cast<double>(M);
  for (std::size_t c = 0; c < f.components(); ++c) {
    for (std::size_t j = 0; j < M; ++j) in[j] = f(j, c);
    execute(plans.forward, in.data(), out.data());
    for (std::size_t r = 0; r < M; ++r) coeffs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = out[r] * scale;
  }
  return SpectralField(f.grid_ptr(), std::move(coeffs));
}

GridFunction from_spectral(const SpectralField& c) {
  const std::size_t M = c.size();
  const PlanPair plans = plan_cache().get(M);
  GridFunction f(c.grid_ptr(), c.components());
  std::vector<std::complex<double>> in(M), out(M);
  for (std::size_t k = 0; k < c.components(); ++k) {
    for (std::size_t r = 0; r < M; ++r) in[r] = c.coefficients()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
    execute(plans.backward, in.data(), out.data());
    for (std::size_t j = 0; j < M; ++j) f(j, k) = out[j].real();
  }
  return f;
}

GridFunction apply_multiplier(const GridFunction& f,
                              const std::function<std::complex<double>(long)>& multiplier) {
  SpectralField c = to_spectral(f);
  const std::size_t M = f.size();
  std::vector<std::complex<double>> m(M);
  for (std::size_t r = 0; r < M; ++r) m[r] = multiplier(wavenumber(r, M));
  for (Eigen::Index k = 0; k < c.coefficients().cols(); ++k) {
    for (std::size_t r = 0; r < M; ++r) c.coefficients()(static_cast<Eigen::Index>(r), k) *= m[r];
  }
  return from_spectral(c);
}

GridFunction frac_power_spectral(const GridFunction& f, double s) {
  require(s > 0.0 && std::isfinite(s), ErrorKind::InvalidArgument, "fractional order must be > 0");
  return apply_multiplier(f, [s](long k) {
    return std::complex<double>(k == 0 ? 0.0 : std::pow(std::abs(static_cast<double>(k)), 2.0 * s), 0.0);
  });
}

GridFunction frac_laplacian_spectral(const GridFunction& f, double s) {
  require(s > 0.0 && s <= 1.0, ErrorKind::InvalidArgument,
          "frac_laplacian_spectral: s must lie in (0, 1]");
  return frac_power_spectral(f, s);
}

GridFunction derivative(const GridFunction& f) {
  const long nyquist = -static_cast<long>(f.size() / 2);
  return apply_multiplier(f, [nyquist](long k) {
    if (k == nyquist) return std::complex<double>(0.0, 0.0);
    return std::complex<double>(0.0, static_cast<double>(k));
  });
}

GridFunction riesz_transform(const GridFunction& f) {
  const long nyquist = -static_cast<long>(f.size() / 2);
  return apply_multiplier(f, [nyquist](long k) {
    if (k == 0 || k == nyquist) return std::complex<double>(0.0, 0.0);
    return std::complex<double>(0.0, k > 0 ? -1.0 : 1.0);
  });
}

}  // namespace hhflow
