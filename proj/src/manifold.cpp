#include "hhflow/manifold.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hhflow/error.hpp"
#include "hhflow/random.hpp"

namespace hhflow {

namespace {

using Sys = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient + 1, kMaxAmbient + 1>;
using SysVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient + 1, 1>;

std::string describe(const Vec& p) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p(i);
  os << ")";
  return os.str();
}

}  // namespace

Hessian::Hessian(std::size_t dim) : n(dim) {
  for (std::size_t i = 0; i < dim; ++i) slices[i] = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

Vec Hessian::contract(const Vec& a, const Vec& b) const {
  Vec out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = a.dot(slices[i] * b);
  return out;
}

double Hessian::max_abs() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, slices[i].cwiseAbs().maxCoeff());
  return m;
}

Manifold::Manifold(Kind kind, std::size_t n) : kind_(kind), n_(n) {}

Manifold Manifold::sphere(std::size_t n, double tube_radius) {
  require(n >= 2 && n <= static_cast<std::size_t>(kMaxAmbient), ErrorKind::InvalidArgument,
          "sphere ambient dimension must be in [2, 4]");
  Manifold m(Kind::Sphere, n);
  m.delta_ = tube_radius > 0.0 ? tube_radius : 0.9;
  require(m.delta_ < 1.0 + 1e-12, ErrorKind::InvalidArgument, "sphere tube radius must not exceed the reach 1");
  return m;
}

Manifold Manifold::ellipsoid(const std::vector<double>& axes, double tube_radius) {
  require(axes.size() >= 2 && axes.size() <= static_cast<std::size_t>(kMaxAmbient),
          ErrorKind::InvalidArgument, "ellipsoid needs 2 to 4 semi-axes");
  double amin = axes.front();
  for (double a : axes) {
    require(a > 0.0 && std::isfinite(a), ErrorKind::InvalidArgument, "ellipsoid semi-axes must be positive");
    amin = std::min(amin, a);
  }
  Manifold m(Kind::Ellipsoid, axes.size());
  m.axes_ = axes;
  m.delta_ = tube_radius > 0.0 ? tube_radius : 0.5 * amin;
  return m;
}

Manifold Manifold::torus(double R, double r, double tube_radius) {
  require(r > 0.0 && R > r, ErrorKind::InvalidArgument, "torus needs R > r > 0");
  Manifold m(Kind::Torus, 3);
  m.R_ = R;
  m.r_ = r;
  m.delta_ = tube_radius > 0.0 ? tube_radius : 0.9 * r;
  require(m.delta_ <= r, ErrorKind::InvalidArgument, "torus tube radius must not exceed r");
  return m;
}

Manifold Manifold::embedded_circle(const Vec& center, const Vec& normal, double radius,
                                   double tube_radius) {
  require(center.size() == 3 && normal.size() == 3, ErrorKind::InvalidArgument,
          "embedded circle lives in R^3");
  require(radius > 0.0, ErrorKind::InvalidArgument, "circle radius must be positive");
  require(normal.norm() > 1e-12, ErrorKind::InvalidArgument, "circle plane normal must be nonzero");
  Manifold m(Kind::EmbeddedCircle, 3);
  m.center_ = center;
  m.normal_ = normal / normal.norm();
  m.r_ = radius;
  m.delta_ = tube_radius > 0.0 ? tube_radius : 0.9 * radius;
  require(m.delta_ <= radius, ErrorKind::InvalidArgument, "circle tube radius must not exceed the radius");
  return m;
}

std::string Manifold::name() const {
  switch (kind_) {
    case Kind::Sphere: return "sphere";
    case Kind::Ellipsoid: return "ellipsoid";
    case Kind::Torus: return "torus";
    case Kind::EmbeddedCircle: return "embedded_circle";
  }
  return "unknown";
}

void Manifold::set_newton(double tol, int max_iter) {
  require(tol > 0.0 && max_iter > 0, ErrorKind::InvalidArgument, "Newton parameters must be positive");
  newton_tol_ = tol;
  newton_max_iter_ = max_iter;
}

double Manifold::jacobian_step() const { return std::max(1e-5, 10.0 * newton_tol_); }

void Manifold::require_point(const Vec& p, const char* where) const {
  require(static_cast<std::size_t>(p.size()) == n_, ErrorKind::SizeMismatch,
          std::string(where) + ": point has wrong dimension");
  require(p.allFinite(), ErrorKind::NonFinite, std::string(where) + ": non-finite point");
}

double Manifold::distance(const Vec& p) const {
  require_point(p, "distance");
  switch (kind_) {
    case Kind::Sphere: return std::abs(p.norm() - 1.0);
    case Kind::Torus: {
      const double rho = std::hypot(p(0), p(1));
      return std::abs(std::hypot(rho - R_, p(2)) - r_);
    }
    case Kind::EmbeddedCircle: {
      const Vec d = p - center_;
      const double h = d.dot(normal_);
      const double w = (d - h * normal_).norm();
      return std::hypot(w - r_, h);
    }
    case Kind::Ellipsoid: return (p - newton_project(p)).norm();
  }
  return 0.0;
}

bool Manifold::in_safe_tube(const Vec& p) const {
  try {
    return distance(p) < 0.5 * delta_;
  } catch (const Error&) {
    return false;
  }
}

void Manifold::require_in_tube(const Vec& p, const char* where) const {
  require_point(p, where);
  if (!in_safe_tube(p)) {
    fail(ErrorKind::OutsideTube, std::string(where) + ": point " + describe(p) + " lies outside the safe tube of the " +
                                     name());
  }
}

Vec Manifold::newton_project(const Vec& p) const {
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  Vec q = p;
  double mu = 0.0;
  bool converged = false;
  for (int it = 0; it < newton_max_iter_ + 1; ++it) {
    const Vec grad = level_set_gradient(q);
    const Mat hess = level_set_hessian(q);
    SysVec F(n + 1);
    F.head(n) = q - p + mu * grad;
    F(n) = level_set(q);
    Sys J(n + 1, n + 1);
    J.topLeftCorner(n, n) = Mat::Identity(n, n) + mu * hess;
    J.topRightCorner(n, 1) = grad;
    J.bottomLeftCorner(1, n) = grad.transpose();
    J(n, n) = 0.0;
    const SysVec step = J.partialPivLu().solve(F);
    if (!step.allFinite()) break;
    q -= step.head(n);
    mu -= step(n);
    if (converged) break;  // one polish step after convergence
    if (step.norm() < newton_tol_) converged = true;
  }
  if (!converged || !q.allFinite()) {
    fail(ErrorKind::NewtonFailure, "closest-point Newton iteration did not converge from " + describe(p));
  }
  return q;
}

Vec Manifold::project_unchecked(const Vec& p) const {
  switch (kind_) {
    case Kind::Sphere: return p / p.norm();
    case Kind::EmbeddedCircle: {
      const Vec d = p - center_;
      const Vec w = d - d.dot(normal_) * normal_;
      return center_ + r_ * w / w.norm();
    }
    case Kind::Ellipsoid:
    case Kind::Torus: return newton_project(p);
  }
  return p;
}

Vec Manifold::project(const Vec& p) const {
  require_point(p, "project");
  if (kind_ == Kind::Ellipsoid) {
    Vec q;
    try {
      q = newton_project(p);
    } catch (const Error&) {
      fail(ErrorKind::OutsideTube, "project: point " + describe(p) + " lies outside the safe tube of the ellipsoid");
    }
    if ((p - q).norm() >= 0.5 * delta_) {
      fail(ErrorKind::OutsideTube, "project: point " + describe(p) + " lies outside the safe tube of the ellipsoid");
    }
    return q;
  }
  require_in_tube(p, "project");
  return project_unchecked(p);
}

Vec Manifold::closest_point(const Vec& p) const {
  require_point(p, "closest_point");
  if (kind_ == Kind::Sphere) {
    require(p.norm() > 0.0, ErrorKind::InvalidArgument, "closest point to the sphere centre is undefined");
  }
  if (kind_ == Kind::EmbeddedCircle) {
    const Vec d = p - center_;
    require((d - d.dot(normal_) * normal_).norm() > 0.0, ErrorKind::InvalidArgument,
            "closest point on the circle is undefined on its axis");
  }
  return project_unchecked(p);
}

Mat Manifold::fd_jacobian(const Vec& p) const {
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  const double h = jacobian_step();
  Mat J(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Vec a = p, b = p;
    a(k) += h;
    b(k) -= h;
    J.col(k) = (project(a) - project(b)) / (2.0 * h);
  }
  return J;
}

Hessian Manifold::fd_hessian(const Vec& p) const {
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  const double h = hessian_step();
  Hessian H(n_);
  const Vec center = project(p);
  for (Eigen::Index k = 0; k < n; ++k) {
    Vec a = p, b = p;
    a(k) += h;
    b(k) -= h;
    const Vec d2 = (project(a) - 2.0 * center + project(b)) / (h * h);
    for (Eigen::Index i = 0; i < n; ++i) H.slice(static_cast<std::size_t>(i))(k, k) = d2(i);
    for (Eigen::Index l = k + 1; l < n; ++l) {
      Vec pp = p, pm = p, mp = p, mm = p;
      pp(k) += h; pp(l) += h;
      pm(k) += h; pm(l) -= h;
      mp(k) -= h; mp(l) += h;
      mm(k) -= h; mm(l) -= h;
      const Vec mixed = (project(pp) - project(pm) - project(mp) + project(mm)) / (4.0 * h * h);
      for (Eigen::Index i = 0; i < n; ++i) {
        H.slice(static_cast<std::size_t>(i))(k, l) = mixed(i);
        H.slice(static_cast<std::size_t>(i))(l, k) = mixed(i);
      }
    }
  }
  return H;
}

Mat Manifold::jacobian(const Vec& p) const {
  if (kind_ == Kind::Sphere) {
    require_in_tube(p, "jacobian");
    const Eigen::Index n = static_cast<Eigen::Index>(n_);
    const double r = p.norm();
    return Mat::Identity(n, n) / r - p * p.transpose() / (r * r * r);
  }
  require_in_tube(p, "jacobian");
  return fd_jacobian(p);
}

Hessian Manifold::hessian(const Vec& p) const {
  require_in_tube(p, "hessian");
  if (kind_ != Kind::Sphere) return fd_hessian(p);
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  const double r = p.norm();
  const double r3 = r * r * r;
  const double r5 = r3 * r * r;
  Hessian H(n_);
  for (Eigen::Index i = 0; i < n; ++i) {
    Mat& S = H.slice(static_cast<std::size_t>(i));
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index l = 0; l < n; ++l) {
        double v = 3.0 * p(i) * p(k) * p(l) / r5;
        if (i == k) v -= p(l) / r3;
        if (i == l) v -= p(k) / r3;
        if (k == l) v -= p(i) / r3;
        S(k, l) = v;
      }
    }
  }
  return H;
}

ProjectionJet Manifold::jet(const Vec& p) const {
  ProjectionJet j;
  j.value = project(p);
  j.jacobian = jacobian(p);
  j.hessian = hessian(p);
  return j;
}

ProjectionJet Manifold::fd_jet(const Vec& p) const {
  require_in_tube(p, "fd_jet");
  ProjectionJet j;
  j.value = project(p);
  j.jacobian = fd_jacobian(p);
  j.hessian = fd_hessian(p);
  return j;
}

Vec Manifold::fd_hessian_contract(const Vec& p, const Vec& a, const Vec& b) const {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return Vec::Zero(p.size());
  const double h = hessian_step();
  const Vec ah = a / na, bh = b / nb;
  if ((ah - bh).squaredNorm() < 1e-28) {
    const Vec d2 = project_unchecked(p + h * ah) - 2.0 * project_unchecked(p) + project_unchecked(p - h * ah);
    return (na * nb / (h * h)) * d2;
  }
  const Vec sum = h * (ah + bh), diff = h * (ah - bh);
  const Vec d2 = project_unchecked(p + sum) - project_unchecked(p + diff) - project_unchecked(p - diff) +
                 project_unchecked(p - sum);
  return (na * nb / (4.0 * h * h)) * d2;
}

Vec Manifold::hessian_contract(const Vec& p, const Vec& a, const Vec& b) const {
  if (kind_ != Kind::Sphere) {
    require_in_tube(p, "hessian_contract");
    return fd_hessian_contract(p, a, b);
  }
  require_in_tube(p, "hessian_contract");
  const double r2 = p.squaredNorm();
  const double r = std::sqrt(r2);
  const double r3 = r2 * r;
  const double pa = p.dot(a), pb = p.dot(b), ab = a.dot(b);
  return (-a * pb - b * pa - p * ab) / r3 + p * (3.0 * pa * pb / (r3 * r2));
}

bool Manifold::try_hessian_contract(const double* p, const double* a, const double* b, double* out) const {
  const std::size_t n = n_;
  if (kind_ == Kind::Sphere) {
    double r2 = 0.0, pa = 0.0, pb = 0.0, ab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r2 += p[i] * p[i];
      pa += p[i] * a[i];
      pb += p[i] * b[i];
      ab += a[i] * b[i];
    }
    const double r = std::sqrt(r2);
    if (!(std::abs(r - 1.0) < 0.5 * delta_)) return false;
    const double inv3 = 1.0 / (r2 * r);
    const double c = 3.0 * pa * pb * inv3 / r2 - ab * inv3;
    for (std::size_t i = 0; i < n; ++i) out[i] = c * p[i] - (a[i] * pb + b[i] * pa) * inv3;
    return true;
  }
  const Eigen::Index ni = static_cast<Eigen::Index>(n);
  const Vec pv = Eigen::Map<const Eigen::VectorXd>(p, ni);
  if (!in_safe_tube(pv)) return false;
  Vec r;
  try {
    r = fd_hessian_contract(pv, Eigen::Map<const Eigen::VectorXd>(a, ni), Eigen::Map<const Eigen::VectorXd>(b, ni));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::OutsideTube || e.kind() == ErrorKind::NewtonFailure) return false;
    throw;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = r(static_cast<Eigen::Index>(i));
  return true;
}

double Manifold::level_set(const Vec& p) const {
  switch (kind_) {
    case Kind::Sphere: return p.squaredNorm() - 1.0;
    case Kind::Ellipsoid: {
      double g = -1.0;
      for (std::size_t i = 0; i < n_; ++i) g += p(static_cast<Eigen::Index>(i)) * p(static_cast<Eigen::Index>(i)) / (axes_[i] * axes_[i]);
      return g;
    }
    case Kind::Torus: {
      const double rho = std::hypot(p(0), p(1));
      return (rho - R_) * (rho - R_) + p(2) * p(2) - r_ * r_;
    }
    case Kind::EmbeddedCircle: break;
  }
  fail(ErrorKind::NotAHypersurface, "the embedded circle has codimension 2 and no level-set function");
}

Vec Manifold::level_set_gradient(const Vec& p) const {
  switch (kind_) {
    case Kind::Sphere: return 2.0 * p;
    case Kind::Ellipsoid: {
      Vec g(static_cast<Eigen::Index>(n_));
      for (std::size_t i = 0; i < n_; ++i) g(static_cast<Eigen::Index>(i)) = 2.0 * p(static_cast<Eigen::Index>(i)) / (axes_[i] * axes_[i]);
      return g;
    }
    case Kind::Torus: {
      const double rho = std::hypot(p(0), p(1));
      require(rho > 0.0, ErrorKind::OutsideTube, "torus level set is singular on the symmetry axis");
      Vec g(3);
      const double f = 2.0 * (rho - R_) / rho;
      g << f * p(0), f * p(1), 2.0 * p(2);
      return g;
    }
    case Kind::EmbeddedCircle: break;
  }
  fail(ErrorKind::NotAHypersurface, "the embedded circle has codimension 2 and no level-set function");
}

Mat Manifold::level_set_hessian(const Vec& p) const {
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  switch (kind_) {
    case Kind::Sphere: return 2.0 * Mat::Identity(n, n);
    case Kind::Ellipsoid: {
      Mat H = Mat::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) H(i, i) = 2.0 / (axes_[static_cast<std::size_t>(i)] * axes_[static_cast<std::size_t>(i)]);
      return H;
    }
    case Kind::Torus: {
      const double x = p(0), y = p(1);
      const double rho = std::hypot(x, y);
      require(rho > 0.0, ErrorKind::OutsideTube, "torus level set is singular on the symmetry axis");
      const double rho2 = rho * rho, rho3 = rho2 * rho;
      const double c = rho - R_;
      Mat H = Mat::Zero(3, 3);
      H(0, 0) = 2.0 * (x * x / rho2 + c * y * y / rho3);
      H(1, 1) = 2.0 * (y * y / rho2 + c * x * x / rho3);
      H(0, 1) = H(1, 0) = 2.0 * (x * y / rho2 - c * x * y / rho3);
      H(2, 2) = 2.0;
      return H;
    }
    case Kind::EmbeddedCircle: break;
  }
  fail(ErrorKind::NotAHypersurface, "the embedded circle has codimension 2 and no level-set function");
}

Vec Manifold::extended_normal(const Vec& p) const {
  require(is_hypersurface(), ErrorKind::NotAHypersurface, "normal field requires a hypersurface target");
  require_point(p, "extended_normal");
  const Vec g = level_set_gradient(p);
  const double norm = g.norm();
  require(norm > 0.0, ErrorKind::OutsideTube, "level-set gradient vanishes");
  return g / norm;
}

Mat Manifold::extended_normal_jacobian(const Vec& p) const {
  require(is_hypersurface(), ErrorKind::NotAHypersurface, "normal field requires a hypersurface target");
  require_point(p, "extended_normal_jacobian");
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  const Vec g = level_set_gradient(p);
  const double norm = g.norm();
  require(norm > 0.0, ErrorKind::OutsideTube, "level-set gradient vanishes");
  const Vec nu = g / norm;
  return (Mat::Identity(n, n) - nu * nu.transpose()) * level_set_hessian(p) / norm;
}

Vec Manifold::normal(const Vec& x) const {
  require(is_hypersurface(), ErrorKind::NotAHypersurface,
          "normal field is only defined for codimension-1 targets");
  return extended_normal(x);
}

Vec Manifold::random_point(std::mt19937_64& rng) const {
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  const double two_pi = 2.0 * std::numbers::pi;
  switch (kind_) {
    case Kind::Sphere:
    case Kind::Ellipsoid: {
      Vec d(n);
      double r2 = 0.0;
      do {
        for (Eigen::Index i = 0; i < n; ++i) d(i) = uniform_pm1(rng);
        r2 = d.squaredNorm();
      } while (r2 > 1.0 || r2 < 1e-4);
      if (kind_ == Kind::Sphere) return d / std::sqrt(r2);
      double q = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) q += d(i) * d(i) / (axes_[static_cast<std::size_t>(i)] * axes_[static_cast<std::size_t>(i)]);
      return d / std::sqrt(q);
    }
    case Kind::Torus: {
      const double theta = two_pi * uniform01(rng);
      const double phi = two_pi * uniform01(rng);
      Vec p(3);
      p << (R_ + r_ * std::cos(phi)) * std::cos(theta), (R_ + r_ * std::cos(phi)) * std::sin(theta), r_ * std::sin(phi);
      return p;
    }
    case Kind::EmbeddedCircle: {
      const double a = two_pi * uniform01(rng);
      Vec e1 = normal_.unitOrthogonal();
      Vec e2(3);
      e2 << normal_(1) * e1(2) - normal_(2) * e1(1), normal_(2) * e1(0) - normal_(0) * e1(2),
          normal_(0) * e1(1) - normal_(1) * e1(0);
      return center_ + r_ * (std::cos(a) * e1 + std::sin(a) * e2);
    }
  }
  return Vec::Zero(n);
}

}  // namespace hhflow
