#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "kowalevski/errors.hpp"

namespace kowalevski {

using Vector3 = Eigen::Vector3d;
using PhaseVector = Eigen::Matrix<double, 9, 1>;

// The nine real phase variables, in nondimensional units with
// I = diag(2, 2, 1), r1 = (1, 0, 0), r2 = (0, 1, 0).
struct PhaseState {
  Vector3 omega = Vector3::Zero();
  Vector3 alpha = Vector3::Zero();
  Vector3 beta = Vector3::Zero();

  // Layout: omega, alpha, beta.
  PhaseVector to_vector() const {
    PhaseVector v;
    v << omega, alpha, beta;
    return v;
  }

  static PhaseState from_vector(const PhaseVector& v) {
    PhaseState s;
    s.omega = v.segment<3>(0);
    s.alpha = v.segment<3>(3);
    s.beta = v.segment<3>(6);
    return s;
  }

  double max_abs() const { return to_vector().cwiseAbs().maxCoeff(); }
};

inline double max_abs_diff(const PhaseState& lhs, const PhaseState& rhs) {
  return (lhs.to_vector() - rhs.to_vector()).cwiseAbs().maxCoeff();
}

// Field magnitudes a > b >= 0 with p^2 = a^2 + b^2, r^2 = a^2 - b^2.
class BodyParams {
 public:
  BodyParams(double a, double b) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a > 0.0) || b < 0.0 || !(a > b)) {
      throw DomainError("BodyParams requires a > b >= 0");
    }
    p2_ = a * a + b * b;
    r2_ = a * a - b * b;
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double p2() const { return p2_; }
  double r2() const { return r2_; }
  double p() const { return std::sqrt(p2_); }
  double r() const { return std::sqrt(r2_); }

  // The separation modules divide by r^2 and need two independent fields.
  void require_two_fields(const char* who) const {
    if (b_ == 0.0) {
      throw DomainError(std::string(who) + " requires b > 0 (b = 0 is the classical one-field case)");
    }
  }

 private:
  double a_;
  double b_;
  double p2_;
  double r2_;
};

struct IntegralValues {
  double h = 0.0;
  double k = 0.0;
  double g = 0.0;
};

struct GeometricResiduals {
  double alpha_norm = 0.0;  // |alpha|^2 - a^2
  double beta_norm = 0.0;   // |beta|^2 - b^2
  double dot = 0.0;         // alpha . beta

  double max_abs() const {
    return std::max({std::abs(alpha_norm), std::abs(beta_norm), std::abs(dot)});
  }
};

struct FieldInvariants {
  double p = 0.0;
  double r = 0.0;
};

// Right-hand side of the scalar equations of motion.
inline PhaseState eom_rhs(const PhaseState& y) {
  const Vector3& w = y.omega;
  PhaseState d;
  d.omega = Vector3(0.5 * (w[1] * w[2] + y.beta[2]), -0.5 * (w[0] * w[2] + y.alpha[2]),
                    y.alpha[1] - y.beta[0]);
  d.alpha = y.alpha.cross(w);
  d.beta = y.beta.cross(w);
  return d;
}

inline PhaseVector eom_rhs(const PhaseVector& y) {
  return eom_rhs(PhaseState::from_vector(y)).to_vector();
}

// H, K, G with the potential terms written for an orthogonal pair
// |alpha| = a, |beta| = b.
inline IntegralValues general_integrals(const PhaseState& y, const BodyParams& params) {
  const Vector3& w = y.omega;
  const Vector3& al = y.alpha;
  const Vector3& be = y.beta;
  const Vector3 gamma = al.cross(be);
  const Vector3 half_w(w[0], w[1], 0.5 * w[2]);

  IntegralValues out;
  out.h = w[0] * w[0] + w[1] * w[1] + 0.5 * w[2] * w[2] - (al[0] + be[1]);
  const double k1 = w[0] * w[0] - w[1] * w[1] + al[0] - be[1];
  const double k2 = 2.0 * w[0] * w[1] + al[1] + be[0];
  out.k = k1 * k1 + k2 * k2;
  const double ga = al.dot(half_w);
  const double gb = be.dot(half_w);
  out.g = ga * ga + gb * gb + w[2] * gamma.dot(half_w) - al[0] * params.b() * params.b() -
          be[1] * params.a() * params.a();
  return out;
}

// Same integrals with G written for an arbitrary pair (alpha, beta).
// Conserved by the flow, invariant under rotate_field_frame, and equal to
// general_integrals on the constrained phase space.
inline IntegralValues covariant_integrals(const PhaseState& y) {
  const Vector3& w = y.omega;
  const Vector3& al = y.alpha;
  const Vector3& be = y.beta;
  const Vector3 gamma = al.cross(be);
  const Vector3 half_w(w[0], w[1], 0.5 * w[2]);

  IntegralValues out;
  out.h = w[0] * w[0] + w[1] * w[1] + 0.5 * w[2] * w[2] - (al[0] + be[1]);
  const double k1 = w[0] * w[0] - w[1] * w[1] + al[0] - be[1];
  const double k2 = 2.0 * w[0] * w[1] + al[1] + be[0];
  out.k = k1 * k1 + k2 * k2;
  const double ga = al.dot(half_w);
  const double gb = be.dot(half_w);
  out.g = ga * ga + gb * gb + w[2] * gamma.dot(half_w) - al[0] * be.squaredNorm() -
          be[1] * al.squaredNorm() + al.dot(be) * (al[1] + be[0]);
  return out;
}

inline GeometricResiduals geometric_residuals(const PhaseState& y, const BodyParams& params) {
  GeometricResiduals out;
  out.alpha_norm = y.alpha.squaredNorm() - params.a() * params.a();
  out.beta_norm = y.beta.squaredNorm() - params.b() * params.b();
  out.dot = y.alpha.dot(y.beta);
  return out;
}

inline FieldInvariants field_invariants(const Vector3& alpha, const Vector3& beta) {
  const double a2 = alpha.squaredNorm();
  const double b2 = beta.squaredNorm();
  const double ab = alpha.dot(beta);
  FieldInvariants out;
  out.p = std::sqrt(a2 + b2);
  out.r = std::sqrt(std::sqrt((a2 - b2) * (a2 - b2) + 4.0 * ab * ab));
  return out;
}

// The automorphism: the pair (alpha, beta) is mixed by the plane rotation
// Theta(theta), then every vector is rotated about the body z-axis.
inline PhaseState rotate_field_frame(const PhaseState& y, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix3d rz;
  rz << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  PhaseState out;
  out.omega = rz * y.omega;
  out.alpha = rz * (c * y.alpha - s * y.beta);
  out.beta = rz * (s * y.alpha + c * y.beta);
  return out;
}

struct NormalizedFrame {
  PhaseState state;
  double theta = 0.0;
};

// Applies rotate_field_frame with the angle that makes alpha' . beta' = 0 and
// |alpha'| >= |beta'|.
inline NormalizedFrame normalize_field_frame(const PhaseState& y, double degenerate_tol = 1e-12) {
  const Vector3 cross = y.alpha.cross(y.beta);
  const double scale = std::max(1.0, y.alpha.squaredNorm() + y.beta.squaredNorm());
  if (cross.norm() <= degenerate_tol * scale) {
    throw DomainError("normalize_field_frame: alpha x beta = 0, the pair is degenerate");
  }
  const double a2 = y.alpha.squaredNorm();
  const double b2 = y.beta.squaredNorm();
  const double ab = y.alpha.dot(y.beta);
  // With this angle cos(2 theta) = (a2 - b2) / r^2 and sin(2 theta) = -2 ab / r^2,
  // so that |alpha'|^2 = (p^2 + r^2) / 2.
  NormalizedFrame out;
  out.theta = (ab == 0.0 && a2 >= b2) ? 0.0 : -0.5 * std::atan2(2.0 * ab, a2 - b2);
  out.state = rotate_field_frame(y, out.theta);
  return out;
}

// Body parameters of the orthogonal pair in the orbit of (alpha, beta).
inline BodyParams params_from_pair(const Vector3& alpha, const Vector3& beta) {
  const FieldInvariants inv = field_invariants(alpha, beta);
  const double p2 = inv.p * inv.p;
  const double r2 = inv.r * inv.r;
  return BodyParams(std::sqrt(0.5 * (p2 + r2)), std::sqrt(std::max(0.0, 0.5 * (p2 - r2))));
}

inline bool is_equilibrium(const PhaseState& y, double tol = 1e-10) {
  return eom_rhs(y).max_abs() < tol;
}

}  // namespace kowalevski
