#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace hhflow {

inline constexpr int kMaxAmbient = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;

/// Second derivatives of pi: slice(i)(k, l) = d_k d_l pi_i.
struct Hessian {
  std::size_t n = 0;
  std::array<Mat, kMaxAmbient> slices;

  explicit Hessian(std::size_t dim = 0);
  Mat& slice(std::size_t i) { return slices[i]; }
  const Mat& slice(std::size_t i) const { return slices[i]; }
  /// sum_{k,l} d_k d_l pi_i a_k b_l for every i.
  Vec contract(const Vec& a, const Vec& b) const;
  double max_abs() const;
};

struct ProjectionJet {
  Vec value;
  Mat jacobian;
  Hessian hessian;
};

/// Closed target manifold N in R^n with its closest-point projection.
///
/// Every evaluation of pi or its derivatives requires the argument to lie in
/// the safe tube dist(p, N) < delta / 2 and throws OutsideTube otherwise.
class Manifold {
 public:
  enum class Kind { Sphere, Ellipsoid, Torus, EmbeddedCircle };

  /// Unit sphere S^{n-1} in R^n.
  static Manifold sphere(std::size_t n, double tube_radius = 0.0);
  /// sum_i x_i^2 / a_i^2 = 1.
  static Manifold ellipsoid(const std::vector<double>& axes, double tube_radius = 0.0);
  /// (sqrt(x^2 + y^2) - R)^2 + z^2 = r^2 in R^3.
  static Manifold torus(double R, double r, double tube_radius = 0.0);
  /// Circle of the given radius around `center` in the plane orthogonal to `normal`.
  static Manifold embedded_circle(const Vec& center, const Vec& normal, double radius,
                                  double tube_radius = 0.0);

  Kind kind() const { return kind_; }
  std::string name() const;
  std::size_t ambient_dim() const { return n_; }
  std::size_t codimension() const { return kind_ == Kind::EmbeddedCircle ? 2 : 1; }
  bool is_hypersurface() const { return codimension() == 1; }
  double tube_radius() const { return delta_; }
  double newton_tol() const { return newton_tol_; }
  int newton_max_iter() const { return newton_max_iter_; }
  void set_newton(double tol, int max_iter);

  const std::vector<double>& axes() const { return axes_; }
  double major_radius() const { return R_; }
  double minor_radius() const { return r_; }
  const Vec& center() const { return center_; }
  const Vec& plane_normal() const { return normal_; }

  /// Euclidean distance from p to N. Closed form where available, otherwise
  /// through the Newton projection (which may fail far from N).
  double distance(const Vec& p) const;
  bool in_safe_tube(const Vec& p) const;

  Vec project(const Vec& p) const;
  /// Closest point without the safe-tube restriction; used to build data.
  /// Fails with NewtonFailure (level sets) or InvalidArgument where pi is undefined.
  Vec closest_point(const Vec& p) const;
  /// dpi(p): closed form for spheres, central differences otherwise.
  Mat jacobian(const Vec& p) const;
  Hessian hessian(const Vec& p) const;
  ProjectionJet jet(const Vec& p) const;
  /// Jet by finite differences of `project`, for every variant.
  ProjectionJet fd_jet(const Vec& p) const;
  /// sum_{k,l} d_k d_l pi(p) a_k b_l; closed form for spheres, otherwise a
  /// directional second difference of pi along a and b.
  Vec hessian_contract(const Vec& p, const Vec& a, const Vec& b) const;

  /// Raw-array form of hessian_contract for the quadrature loops: writes the
  /// n-vector to `out` and returns false (leaving `out` untouched) when p is
  /// outside the safe tube.
  bool try_hessian_contract(const double* p, const double* a, const double* b, double* out) const;

  /// Unit normal at an on-manifold point. NotAHypersurface for codimension 2.
  Vec normal(const Vec& x) const;
  /// grad g / |grad g| off the manifold (the smooth extension of the normal).
  Vec extended_normal(const Vec& p) const;
  /// Jacobian of extended_normal.
  Mat extended_normal_jacobian(const Vec& p) const;

  /// Level-set function g, its gradient and Hessian (hypersurfaces only).
  double level_set(const Vec& p) const;
  Vec level_set_gradient(const Vec& p) const;
  Mat level_set_hessian(const Vec& p) const;

  /// Random point on N from the given generator (portable mapping of raw bits).
  Vec random_point(std::mt19937_64& rng) const;

  /// Finite-difference steps for the jets.
  double jacobian_step() const;
  double hessian_step() const { return 1e-4; }

 private:
  Manifold(Kind kind, std::size_t n);
  void require_point(const Vec& p, const char* where) const;
  void require_in_tube(const Vec& p, const char* where) const;
  Vec project_unchecked(const Vec& p) const;
  Vec newton_project(const Vec& p) const;
  Mat fd_jacobian(const Vec& p) const;
  Hessian fd_hessian(const Vec& p) const;
  Vec fd_hessian_contract(const Vec& p, const Vec& a, const Vec& b) const;

  Kind kind_;
  std::size_t n_;
  double delta_ = 0.0;
  double newton_tol_ = 1e-10;
  int newton_max_iter_ = 50;
  std::vector<double> axes_;
  double R_ = 0.0;
  double r_ = 0.0;
  Vec center_;
  Vec normal_;
};

}  // namespace hhflow
