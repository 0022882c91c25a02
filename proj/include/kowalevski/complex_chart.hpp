#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "kowalevski/errors.hpp"
#include "kowalevski/rigid_core.hpp"

namespace kowalevski {

using cplx = std::complex<double>;

// Complex chart of the phase space. On images of real states the index-2
// variables are the conjugates of the index-1 variables and w3 is real.
struct ComplexState {
  cplx x1, x2, y1, y2, z1, z2, w1, w2, w3;

  std::array<cplx, 9> as_array() const { return {x1, x2, y1, y2, z1, z2, w1, w2, w3}; }

  static ComplexState from_array(const std::array<cplx, 9>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& c : as_array()) m = std::max(m, std::abs(c));
    return m;
  }
};

struct ComplexIntegralValues {
  cplx h, k, g;

  IntegralValues real() const { return {h.real(), k.real(), g.real()}; }
  double max_imag() const { return std::max({std::abs(h.imag()), std::abs(k.imag()), std::abs(g.imag())}); }
};

inline ComplexState to_complex(const PhaseState& y) {
  const Vector3& w = y.omega;
  const Vector3& al = y.alpha;
  const Vector3& be = y.beta;
  ComplexState c;
  c.x1 = cplx(al[0] - be[1], al[1] + be[0]);
  c.x2 = std::conj(c.x1);
  c.y1 = cplx(al[0] + be[1], al[1] - be[0]);
  c.y2 = std::conj(c.y1);
  c.z1 = cplx(al[2], be[2]);
  c.z2 = std::conj(c.z1);
  c.w1 = cplx(w[0], w[1]);
  c.w2 = std::conj(c.w1);
  c.w3 = cplx(w[2], 0.0);
  return c;
}

// Inverse of the chart in complex arithmetic, ordered as omega, alpha, beta.
// No reality check.
inline std::array<cplx, 9> complex_phase_values(const ComplexState& c) {
  const cplx i(0.0, 1.0);
  std::array<cplx, 9> v;
  v[0] = (c.w1 + c.w2) / 2.0;
  v[1] = (c.w1 - c.w2) / (2.0 * i);
  v[2] = c.w3;
  v[3] = (c.x1 + c.x2 + c.y1 + c.y2) / 4.0;
  v[4] = (c.x1 + c.y1 - c.x2 - c.y2) / (4.0 * i);
  v[5] = (c.z1 + c.z2) / 2.0;
  v[6] = (c.x1 - c.y1 - c.x2 + c.y2) / (4.0 * i);
  v[7] = (c.y1 + c.y2 - c.x1 - c.x2) / 4.0;
  v[8] = (c.z1 - c.z2) / (2.0 * i);
  return v;
}

// Real state of a complex point. Throws RealityViolation when an imaginary
// part exceeds tol * max(1, magnitude of the state).
inline PhaseState from_complex(const ComplexState& c, double tol = 1e-10) {
  const std::array<cplx, 9> v = complex_phase_values(c);
  double scale = 1.0;
  double worst = 0.0;
  for (const cplx& z : v) {
    scale = std::max(scale, std::abs(z));
    worst = std::max(worst, std::abs(z.imag()));
  }
  if (!(worst <= tol * scale)) {
    throw RealityViolation("from_complex: imaginary part " + std::to_string(worst) +
                           " exceeds tolerance");
  }
  PhaseVector out;
  for (int k = 0; k < 9; ++k) out[k] = v[static_cast<std::size_t>(k)].real();
  return PhaseState::from_vector(out);
}

inline ComplexIntegralValues complex_integrals(const ComplexState& c, const BodyParams& params) {
  const double p2 = params.p2();
  const double r2 = params.r2();
  ComplexIntegralValues out;
  out.h = 0.5 * c.w3 * c.w3 + c.w1 * c.w2 - 0.5 * (c.y1 + c.y2);
  out.k = (c.w1 * c.w1 + c.x1) * (c.w2 * c.w2 + c.x2);
  out.g = 0.25 * (p2 - c.x1 * c.x2) * c.w3 * c.w3 +
          0.5 * (c.x2 * c.z1 * c.w1 + c.x1 * c.z2 * c.w2) * c.w3 +
          0.25 * (c.x2 * c.w1 + c.y1 * c.w2) * (c.y2 * c.w1 + c.x1 * c.w2) -
          0.25 * p2 * (c.y1 + c.y2) + 0.25 * r2 * (c.x1 + c.x2);
  return out;
}

// The two field-length equations and the orthogonality equation in the chart.
inline std::array<cplx, 3> complex_constraint_residuals(const ComplexState& c, const BodyParams& params) {
  return {c.z1 * c.z1 + c.x1 * c.y2 - params.r2(), c.z2 * c.z2 + c.x2 * c.y1 - params.r2(),
          c.x1 * c.x2 + c.y1 * c.y2 + 2.0 * c.z1 * c.z2 - 2.0 * params.p2()};
}

// Equations of motion in the chart, derivative with respect to i*t (gyrostat
// term fixed to zero). The real-time derivative of to_complex(y) is i times
// this field.
inline ComplexState complex_flow(const ComplexState& c) {
  ComplexState d;
  d.x1 = -c.x1 * c.w3 + c.z1 * c.w1;
  d.x2 = c.x2 * c.w3 - c.z2 * c.w2;
  d.y1 = -c.y1 * c.w3 + c.z2 * c.w1;
  d.y2 = c.y2 * c.w3 - c.z1 * c.w2;
  d.z1 = 0.5 * (c.x1 * c.w2 - c.y2 * c.w1);
  d.z2 = 0.5 * (-c.x2 * c.w1 + c.y1 * c.w2);
  d.w1 = 0.5 * (-c.w1 * c.w3 - c.z1);
  d.w2 = 0.5 * (c.w2 * c.w3 + c.z2);
  d.w3 = 0.5 * (c.y2 - c.y1);
  return d;
}

}  // namespace kowalevski
