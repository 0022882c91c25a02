#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "kowalevski/complex_chart.hpp"
#include "kowalevski/errors.hpp"
#include "kowalevski/rigid_core.hpp"

namespace kowalevski {

// Moduli x^2 = x1 x2, y^2 = y1 y2, z^2 = z1 z2 of the chart variables.
struct ProjectionPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct SPoint {
  double s1 = 0.0;
  double s2 = 0.0;
};

struct XZPoint {
  double x = 0.0;
  double z = 0.0;
};

struct TPoint {
  double t1 = 0.0;
  double t2 = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
};

struct XiX {
  double xi = 0.0;
  double x = 0.0;
};

namespace detail {

inline double real_modulus(const cplx& product, double tol, const char* name) {
  const double scale = std::max(1.0, std::abs(product));
  if (std::abs(product.imag()) > tol * scale || product.real() < -tol * scale) {
    throw RealityViolation(std::string("project_xz: ") + name + " is not a nonnegative real");
  }
  return std::sqrt(std::max(0.0, product.real()));
}

}  // namespace detail

inline ProjectionPoint project_xz(const ComplexState& c, double tol = 1e-10) {
  ProjectionPoint out;
  out.x = detail::real_modulus(c.x1 * c.x2, tol, "x1 x2");
  out.y = detail::real_modulus(c.y1 * c.y2, tol, "y1 y2");
  out.z = detail::real_modulus(c.z1 * c.z2, tol, "z1 z2");
  return out;
}

// Circle net: x^2 + z^2 + r^2 = 2 s1 x, x^2 + z^2 - r^2 = 2 s2 x.
inline SPoint s_from_xz(double x, double z, const BodyParams& params) {
  if (!(x > 0.0)) throw DomainError("s_from_xz: x must be positive (x = 0 is s1 = infinity)");
  const double q = x * x + z * z;
  return {(q + params.r2()) / (2.0 * x), (q - params.r2()) / (2.0 * x)};
}

// Rows: d s1, d s2; columns: d/dx, d/dz.
inline Eigen::Matrix2d s_jacobian(double x, double z, const BodyParams& params) {
  if (!(x > 0.0)) throw DomainError("s_jacobian: x must be positive");
  const double r2 = params.r2();
  Eigen::Matrix2d j;
  j << (x * x - z * z - r2) / (2.0 * x * x), z / x, (x * x - z * z + r2) / (2.0 * x * x), z / x;
  return j;
}

// Inverse of s_from_xz on the quarter plane x > 0, z >= 0. Requires s1 > s2.
inline XZPoint xz_from_s(const SPoint& sp, const BodyParams& params, double tol = 1e-12) {
  const double d = sp.s1 - sp.s2;
  if (!(d > 0.0)) throw DomainError("xz_from_s: requires s1 > s2");
  const double x = params.r2() / d;
  const double z2 = params.r2() * (sp.s1 + sp.s2) / d - x * x;
  if (z2 < -tol * std::max(1.0, x * x)) throw DomainError("xz_from_s: z^2 < 0, the point is not in the net");
  return {x, std::sqrt(std::max(0.0, z2))};
}

inline bool s_rectangle_check(const SPoint& sp, const BodyParams& params) {
  return sp.s1 * sp.s1 >= params.a() * params.a() && sp.s2 * sp.s2 <= params.b() * params.b();
}

// Phi_+ >= 0 and Phi_- <= 0 cut out the image of the phase space.
inline double phi_plus(double x, double z, const BodyParams& params) {
  const double q = x * x + z * z + params.r2();
  return q * q - 2.0 * (params.p2() + params.r2()) * x * x;
}

inline double phi_minus(double x, double z, const BodyParams& params) {
  const double q = x * x + z * z - params.r2();
  return q * q - 2.0 * (params.p2() - params.r2()) * x * x;
}

inline double sigma_of(double tau, const BodyParams& params) {
  return tau * tau - 2.0 * params.p2() * tau + params.r2() * params.r2();
}

// Roots t1 >= t2 of t^2 - 2 tau xi t / (tau - x^2) + (tau xi^2 + sigma x^2) / (tau - x^2).
inline TPoint t_from_point(double xi, double x, double tau, double sigma, double tol = 1e-12) {
  const double den = tau - x * x;
  if (std::abs(den) <= 1e-14 * std::max(1.0, std::abs(tau))) {
    throw DomainError("t_from_point: tau = x^2, the quadratic degenerates");
  }
  const double disc = tau * xi * xi + sigma * x * x - tau * sigma;
  const double scale = std::max({1.0, std::abs(tau * xi * xi), std::abs(sigma * x * x), std::abs(tau * sigma)});
  if (disc < -tol * scale) throw DomainError("t_from_point: point outside the tangent-line region");
  const double mu = std::sqrt(std::max(0.0, disc));
  const double ta = (tau * xi + mu * x) / den;
  const double tb = (tau * xi - mu * x) / den;
  return {std::max(ta, tb), std::min(ta, tb), tau, sigma};
}

// Residual of the defining quadratic at t.
inline double t_quadratic_residual(double t, double xi, double x, double tau, double sigma) {
  const double den = tau - x * x;
  return t * t - 2.0 * tau * xi / den * t + (tau * xi * xi + sigma * x * x) / den;
}

// (xi, x) of the tangent-line plane as functions of (s1, s2).
inline XiX st_link(const SPoint& sp, double tau, const BodyParams& params) {
  const double d = sp.s1 - sp.s2;
  if (d == 0.0) throw DomainError("st_link: s1 = s2");
  return {params.r2() * (sp.s1 + sp.s2) / d - tau, params.r2() / d};
}

// A line xi = slope * x + intercept in the (x, xi) plane.
struct LineXiX {
  double slope = 0.0;
  double intercept = 0.0;
};

struct Tangency {
  // Discriminant of the intersection with tau xi^2 + sigma x^2 = tau sigma,
  // divided by the size of its terms. Zero for a tangent line.
  double relative_discriminant = 0.0;
  // Abscissa of the double point.
  double x_touch = 0.0;
};

inline Tangency line_conic_tangency(const LineXiX& line, double tau, double sigma) {
  const double m = line.slope;
  const double c = line.intercept;
  const double qa = tau * m * m + sigma;
  const double qb = 2.0 * tau * m * c;
  const double qc = tau * (c * c - sigma);
  Tangency out;
  const double disc = qb * qb - 4.0 * qa * qc;
  const double scale = std::max({qb * qb, std::abs(4.0 * qa * qc), 1e-300});
  out.relative_discriminant = disc / scale;
  out.x_touch = qa != 0.0 ? -qb / (2.0 * qa) : 0.0;
  return out;
}

// The boundary s1 = s1_value (or s2 = s2_value) of the rectangle as a line in
// the (x, xi) plane: xi = 2 s x - r^2 - tau for s1 = s, xi = 2 s x + r^2 - tau
// for s2 = s.
inline LineXiX s1_line(double s1_value, double tau, const BodyParams& params) {
  return {2.0 * s1_value, -params.r2() - tau};
}

inline LineXiX s2_line(double s2_value, double tau, const BodyParams& params) {
  return {2.0 * s2_value, params.r2() - tau};
}

// Rank test of the generalized boundary: true iff the numerical rank of the
// fiber part L of the tangent map is below dim Z (number of rows). Singular
// values below rel_threshold times the largest count as zero. Entries that are
// square roots of vanishing radicands carry errors near sqrt(eps), so the
// default sits two orders above that.
inline bool generalized_boundary_test(const Eigen::MatrixXcd& fiber_jacobian, double rel_threshold = 1e-6) {
  if (fiber_jacobian.rows() == 0) return false;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(fiber_jacobian);
  const Eigen::VectorXd sv = svd.singularValues();
  const double top = sv.size() > 0 ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  if (top > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv[i] > rel_threshold * top) ++rank;
    }
  }
  return rank < fiber_jacobian.rows();
}

template <class JacobianEval, class Point>
bool generalized_boundary_test(const JacobianEval& jacobian_eval, const Point& point,
                               double rel_threshold = 1e-6) {
  return generalized_boundary_test(Eigen::MatrixXcd(jacobian_eval(point)), rel_threshold);
}

}  // namespace kowalevski
