#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <string>

#include "kowalevski/complex_chart.hpp"
#include "kowalevski/errors.hpp"
#include "kowalevski/rigid_core.hpp"

namespace kowalevski {

// Constants of the partial integrals M = m, L = ell on subsystem N.
struct SubsystemNConstants {
  double m = 1.0;
  double ell = 0.0;

  void validate() const {
    if (!std::isfinite(m) || !std::isfinite(ell) || std::abs(m) < 1e-12) {
      throw DomainError("SubsystemNConstants: |m| must exceed 1e-12");
    }
  }
};

// Constants of the partial integrals S = s, T = tau on subsystem O.
struct SubsystemOConstants {
  double s = -1.0;
  double tau = 1.0;

  void validate() const {
    if (!std::isfinite(s) || !std::isfinite(tau) || s == 0.0) {
      throw DomainError("SubsystemOConstants: s must be nonzero");
    }
  }
};

struct ComplexNConstants {
  cplx m, ell;
};

struct ComplexOConstants {
  cplx s, tau;
};

namespace detail {

inline double largest(std::initializer_list<cplx> terms) {
  double m = 0.0;
  for (const cplx& t : terms) m = std::max(m, std::abs(t));
  return m;
}

inline double scaled(const cplx& residual, double scale) {
  return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
}

inline void require_nonzero(const cplx& v, const char* what) {
  if (v == cplx(0.0, 0.0)) throw DomainError(std::string(what) + " vanishes");
}

inline void require_real(const cplx& v, double scale, double tol, const char* what) {
  if (std::abs(v.imag()) > tol * std::max(1.0, scale)) {
    throw RealityViolation(std::string(what) + " has imaginary part " + std::to_string(v.imag()));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// First critical subsystem.

inline std::array<cplx, 2> residual_m(const ComplexState& c) {
  return {c.w1 * c.w1 + c.x1, c.w2 * c.w2 + c.x2};
}

inline double normalized_residual_m(const ComplexState& c) {
  const auto r = residual_m(c);
  return std::max(detail::scaled(r[0], detail::largest({c.w1 * c.w1, c.x1})),
                  detail::scaled(r[1], detail::largest({c.w2 * c.w2, c.x2})));
}

inline bool on_m(const ComplexState& c, double tol = 1e-10) { return normalized_residual_m(c) <= tol; }

inline cplx integral_f(const ComplexState& c) {
  return c.w1 * c.w2 * c.w3 + c.z2 * c.w1 + c.z1 * c.w2;
}

// A point of subsystem M over the given field pair: w1 = sign * i * sqrt(x1).
inline PhaseState point_on_m(const Vector3& alpha, const Vector3& beta, double omega3, int sign = 1) {
  const cplx x1(alpha[0] - beta[1], alpha[1] + beta[0]);
  const cplx w1 = static_cast<double>(sign >= 0 ? 1 : -1) * cplx(0.0, 1.0) * std::sqrt(x1);
  PhaseState y;
  y.alpha = alpha;
  y.beta = beta;
  y.omega = Vector3(w1.real(), w1.imag(), omega3);
  return y;
}

// ---------------------------------------------------------------------------
// Second critical subsystem.

inline std::array<cplx, 2> residual_n(const ComplexState& c) {
  detail::require_nonzero(c.x1 * c.x2, "residual_n: x1 x2");
  return {c.x1 * c.x2 * c.w3 - (c.x2 * c.z1 * c.w1 + c.x1 * c.z2 * c.w2),
          c.x2 / c.x1 * (c.w1 * c.w1 + c.x1) - c.x1 / c.x2 * (c.w2 * c.w2 + c.x2)};
}

inline double normalized_residual_n(const ComplexState& c) {
  const auto r = residual_n(c);
  const double s0 = detail::largest({c.x1 * c.x2 * c.w3, c.x2 * c.z1 * c.w1, c.x1 * c.z2 * c.w2});
  const double s1 = detail::largest({c.x2 / c.x1 * c.w1 * c.w1, c.x2, c.x1 / c.x2 * c.w2 * c.w2, c.x1});
  return std::max(detail::scaled(r[0], s0), detail::scaled(r[1], s1));
}

inline bool on_n(const ComplexState& c, double tol = 1e-10) { return normalized_residual_n(c) <= tol; }

// M and L in complex arithmetic; the square root of x1 x2 is the principal one.
inline ComplexNConstants integrals_n_complex(const ComplexState& c, const BodyParams& params) {
  const cplx x1x2 = c.x1 * c.x2;
  detail::require_nonzero(x1x2, "integrals_n: x1 x2");
  if (x1x2.real() < 0.0 && std::abs(x1x2.imag()) <= 1e-12 * std::abs(x1x2)) {
    throw BranchError("integrals_n: x1 x2 lies on the negative real axis");
  }
  ComplexNConstants out;
  out.m = (c.x2 / c.x1 * (c.w1 * c.w1 + c.x1) + c.x1 / c.x2 * (c.w2 * c.w2 + c.x2)) / (2.0 * params.r2());
  out.ell = (c.w1 * c.w2 + (x1x2 + c.z1 * c.z2) * out.m) / std::sqrt(x1x2);
  return out;
}

inline SubsystemNConstants integrals_n(const ComplexState& c, const BodyParams& params,
                                       double tol = 1e-9) {
  const ComplexNConstants v = integrals_n_complex(c, params);
  detail::require_real(v.m, std::abs(v.m), tol, "integrals_n: M");
  detail::require_real(v.ell, std::abs(v.ell), tol, "integrals_n: L");
  return {v.m.real(), v.ell.real()};
}

// The relation tying (h, k, g) on N, written in its weighted-homogeneous
// form (p^2 h - 2 g)^2 - r^4 k.
inline double bifurcation_residual_n(const IntegralValues& v, const BodyParams& params) {
  const double u = params.p2() * v.h - 2.0 * v.g;
  return u * u - params.r2() * params.r2() * v.k;
}

// ---------------------------------------------------------------------------
// Third critical subsystem.

inline std::array<cplx, 2> residual_o(const ComplexState& c) {
  detail::require_nonzero(c.w1 * c.w2, "residual_o: w1 w2");
  const cplx &x1 = c.x1, &x2 = c.x2, &y1 = c.y1, &y2 = c.y2, &z1 = c.z1, &z2 = c.z2;
  const cplx &w1 = c.w1, &w2 = c.w2, &w3 = c.w3;
  const cplx first = (w2 * x1 + w1 * y2 + w3 * z1) / w1 - (w1 * x2 + w2 * y1 + w3 * z2) / w2;
  const cplx second =
      (w2 * z1 + w1 * z2) * w3 * w3 +
      (w2 * z1 * z1 / w1 + w1 * z2 * z2 / w2 + w1 * w2 * (y1 + y2) + x1 * w2 * w2 + x2 * w1 * w1) * w3 +
      w2 * w2 * x1 * z1 / w1 + w1 * w1 * x2 * z2 / w2 + x1 * z2 * w2 + x2 * z1 * w1 +
      (w1 * z2 - w2 * z1) * (y1 - y2);
  return {first, second};
}

inline double normalized_residual_o(const ComplexState& c) {
  const auto r = residual_o(c);
  const cplx &x1 = c.x1, &x2 = c.x2, &y1 = c.y1, &y2 = c.y2, &z1 = c.z1, &z2 = c.z2;
  const cplx &w1 = c.w1, &w2 = c.w2, &w3 = c.w3;
  const double s0 = detail::largest({w2 * x1 / w1, y2, w3 * z1 / w1, w1 * x2 / w2, y1, w3 * z2 / w2});
  const double s1 = detail::largest(
      {w2 * z1 * w3 * w3, w1 * z2 * w3 * w3, w2 * z1 * z1 / w1 * w3, w1 * z2 * z2 / w2 * w3,
       w1 * w2 * y1 * w3, w1 * w2 * y2 * w3, x1 * w2 * w2 * w3, x2 * w1 * w1 * w3,
       w2 * w2 * x1 * z1 / w1, w1 * w1 * x2 * z2 / w2, x1 * z2 * w2, x2 * z1 * w1, w1 * z2 * y1,
       w1 * z2 * y2, w2 * z1 * y1, w2 * z1 * y2});
  return std::max(detail::scaled(r[0], s0), detail::scaled(r[1], s1));
}

inline bool on_o(const ComplexState& c, double tol = 1e-10) { return normalized_residual_o(c) <= tol; }

inline ComplexOConstants integrals_o_complex(const ComplexState& c) {
  detail::require_nonzero(c.w1 * c.w2, "integrals_o: w1 w2");
  const cplx e1 = c.y2 * c.w1 + c.x1 * c.w2 + c.z1 * c.w3;
  const cplx e2 = c.x2 * c.w1 + c.y1 * c.w2 + c.z2 * c.w3;
  ComplexOConstants out;
  out.s = -0.25 * (e1 / c.w1 + e2 / c.w2);
  out.tau = 0.5 * (c.w1 * e2 + c.w2 * e1) + c.x1 * c.x2 + c.z1 * c.z2;
  return out;
}

inline SubsystemOConstants integrals_o(const ComplexState& c, double tol = 1e-9) {
  const ComplexOConstants v = integrals_o_complex(c);
  detail::require_real(v.s, std::abs(v.s), tol, "integrals_o: S");
  detail::require_real(v.tau, std::abs(v.tau), tol, "integrals_o: T");
  return {v.s.real(), v.tau.real()};
}

// (h, k, g) on the level S = s, T = tau.
inline IntegralValues bifurcation_constants_o(const SubsystemOConstants& c, const BodyParams& params) {
  c.validate();
  const double p2 = params.p2();
  const double r4 = params.r2() * params.r2();
  const double s = c.s;
  const double tau = c.tau;
  IntegralValues out;
  out.h = (p2 - tau) / (2.0 * s) + s;
  out.k = (tau * tau - 2.0 * p2 * tau + r4) / (4.0 * s * s) + tau;
  out.g = (p2 * p2 - r4) / (4.0 * s) + 0.5 * (p2 - tau) * s;
  return out;
}

}  // namespace kowalevski
