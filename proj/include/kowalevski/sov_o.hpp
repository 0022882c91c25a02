#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "kowalevski/complex_chart.hpp"
#include "kowalevski/coordinate_nets.hpp"
#include "kowalevski/critical_set.hpp"
#include "kowalevski/errors.hpp"
#include "kowalevski/integrator.hpp"
#include "kowalevski/rigid_core.hpp"
#include "kowalevski/separated_flow.hpp"

namespace kowalevski {

// sigma = tau^2 - 2 p^2 tau + r^4, chi = sqrt(k), kappa = sqrt(sigma) (real
// or pure imaginary).
struct OConstantsDerived {
  double sigma = 0.0;
  double chi = 0.0;
  cplx kappa;
};

inline OConstantsDerived derive_o(const SubsystemOConstants& c, const BodyParams& params) {
  c.validate();
  OConstantsDerived out;
  out.sigma = sigma_of(c.tau, params);
  const double k = out.sigma / (4.0 * c.s * c.s) + c.tau;
  if (k < 0.0) throw DomainError("derive_o: k = sigma / (4 s^2) + tau is negative");
  out.chi = std::sqrt(k);
  out.kappa = std::sqrt(cplx(out.sigma, 0.0));
  return out;
}

// Sign bits of the radical tower, in this order.
enum RadicalO : int { kSqrtSTau = 0, kK1, kK2, kL1, kL2, kV1, kV2, kM1, kM2, kN1, kN2 };
using BranchBitsO = std::array<int, 11>;

inline const char* radical_o_name(int bit) {
  static const char* const names[11] = {"sqrt(s tau)", "K1", "K2", "L1", "L2", "V1",
                                        "V2",          "M1", "M2", "N1", "N2"};
  return bit >= 0 && bit < 11 ? names[bit] : "?";
}

struct SeparatedStateO {
  double t1 = 0.0;
  double t2 = 0.0;
  BranchBitsO signs{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
};

struct RadicalTowerO {
  cplx sst;  // signed sqrt(s tau)
  cplx K1, K2, L1, L2;
  cplx U1, U2;
  cplx V1, V2;
  cplx M1, M2, N1, N2;
  cplx R;
};

inline RadicalTowerO radical_tower(const SeparatedStateO& st, const SubsystemOConstants& c,
                                   const BodyParams& params) {
  params.require_two_fields("sov_o");
  const OConstantsDerived d = derive_o(c, params);
  const double s = c.s;
  const double tau = c.tau;
  const double r2 = params.r2();
  const double vv = 4.0 * s * s * d.chi * d.chi;
  auto root = [&st](int bit, const cplx& v) {
    return static_cast<double>(st.signs[static_cast<std::size_t>(bit)]) * std::sqrt(v);
  };
  RadicalTowerO w;
  w.sst = root(kSqrtSTau, cplx(s * tau, 0.0));
  w.K1 = root(kK1, st.t1 + d.kappa);
  w.K2 = root(kK2, st.t2 + d.kappa);
  w.L1 = root(kL1, st.t1 - d.kappa);
  w.L2 = root(kL2, st.t2 - d.kappa);
  w.U1 = w.K1 * w.L1;
  w.U2 = w.K2 * w.L2;
  w.R = (w.K1 * w.K2 + w.L1 * w.L2) / std::sqrt(2.0);
  w.V1 = root(kV1, cplx(vv - st.t1 * st.t1, 0.0));
  w.V2 = root(kV2, cplx(vv - st.t2 * st.t2, 0.0));
  w.M1 = root(kM1, cplx(st.t1 + tau + r2, 0.0));
  w.M2 = root(kM2, cplx(st.t2 + tau + r2, 0.0));
  w.N1 = root(kN1, cplx(st.t1 + tau - r2, 0.0));
  w.N2 = root(kN2, cplx(st.t2 + tau - r2, 0.0));
  return w;
}

// ---------------------------------------------------------------------------
// Polynomials of the (x, xi) plane.

struct OPolynomials {
  double Phi1 = 0.0, Phi2 = 0.0;
  double Psi1 = 0.0, Psi2 = 0.0;
  double Theta1 = 0.0, Theta2 = 0.0;
  double P = 0.0, Q = 0.0;
};

inline OPolynomials o_polynomials(double x, double xi, const SubsystemOConstants& c, const BodyParams& params) {
  const OConstantsDerived d = derive_o(c, params);
  const double s = c.s;
  const double s2 = s * s;
  const double tau = c.tau;
  const double p2 = params.p2();
  const double r2 = params.r2();
  const double r4 = r2 * r2;
  const double chi = d.chi;
  const double ch2 = chi * chi;
  OPolynomials o;
  o.Phi1 = (xi + tau + r2) * (xi + tau + r2) - 2.0 * (p2 + r2) * x * x;
  o.Phi2 = (xi + tau - r2) * (xi + tau - r2) - 2.0 * (p2 - r2) * x * x;
  o.Psi1 = xi * xi - 4.0 * s2 * (x + chi) * (x + chi);
  o.Psi2 = xi * xi - 4.0 * s2 * (x - chi) * (x - chi);
  o.Theta1 = (xi - 2.0 * s * x) * (xi - 2.0 * s * x) - 4.0 * s2 * ch2;
  o.Theta2 = (xi + 2.0 * s * x) * (xi + 2.0 * s * x) - 4.0 * s2 * ch2;
  o.P = 4.0 * s2 * (x * x - ch2) * (2.0 * (tau - p2) * x * x - tau * tau + r4) +
        8.0 * s2 * ((tau - 2.0 * ch2) * x * x + tau * ch2) * xi -
        2.0 * ((tau - p2 - 2.0 * s2) * x * x + tau * (p2 - 2.0 * s2) - r4) * xi * xi - 2.0 * tau * xi * xi * xi -
        xi * xi * xi * xi;
  const double q0 = xi + tau + 2.0 * s2 - p2;
  o.Q = q0 * q0 - 4.0 * s2 * x * x - (p2 - 2.0 * s2) * (p2 - 2.0 * s2) + r4;
  return o;
}

// P and Q in the t-coordinates: P = 4 xi^2 Pt / (t1+t2)^2, Q = 2 xi Qt / (t1+t2).
inline double p_tilde(double t1, double t2, const SubsystemOConstants& c, const BodyParams& params) {
  const double s2 = c.s * c.s;
  const double tau = c.tau;
  const double p2 = params.p2();
  const double r4 = params.r2() * params.r2();
  return -(t1 * t1 - r4) * (t2 * t2 - r4) +
         tau * ((2.0 * s2 - t2) * t1 * t1 + (2.0 * s2 - t1) * t2 * t2 - p2 * (t1 * t1 + t2 * t2) +
                r4 * (t1 + t2 - 4.0 * s2 + 2.0 * p2)) +
         2.0 * tau * tau * (2.0 * s2 - p2) * (t1 + t2) + tau * tau * tau * (t1 + t2 + 4.0 * s2 - 2.0 * p2) +
         tau * tau * tau * tau;
}

inline double q_tilde(double t1, double t2, const SubsystemOConstants& c, const BodyParams& params) {
  const double s2 = c.s * c.s;
  const double tau = c.tau;
  const double p2 = params.p2();
  const double r4 = params.r2() * params.r2();
  return t1 * t2 + (2.0 * s2 - p2) * (t1 + t2) + r4 + tau * (t1 + t2 + 4.0 * s2 - 2.0 * p2) + tau * tau;
}

// ---------------------------------------------------------------------------
// Accessible region in the (s1, s2) plane.

struct RegionLinesO {
  double lambda_plus = 0.0, lambda_minus = 0.0;
  double m_plus = 0.0, m_minus = 0.0;
};

inline RegionLinesO region_lines_o(const SPoint& sp, const SubsystemOConstants& c, const BodyParams& params) {
  const OConstantsDerived d = derive_o(c, params);
  const double s = c.s;
  const double sum = sp.s1 + sp.s2;
  const double diff = sp.s1 - sp.s2;
  const double kl = (c.tau - 2.0 * s * d.chi) / params.r2();
  const double km = (c.tau + 2.0 * s * d.chi) / params.r2();
  return {sum - kl * diff + 2.0 * s, sum - kl * diff - 2.0 * s, sum - km * diff + 2.0 * s,
          sum - km * diff - 2.0 * s};
}

inline bool region_o(const SPoint& sp, const SubsystemOConstants& c, const BodyParams& params, double tol = 0.0) {
  const RegionLinesO l = region_lines_o(sp, c, params);
  const double a = params.a();
  const double b = params.b();
  return l.lambda_plus * l.lambda_minus >= -tol && l.m_plus * l.m_minus <= tol &&
         sp.s1 * sp.s1 >= a * a - tol && sp.s2 * sp.s2 <= b * b + tol;
}

// Xi_+ = x^2 Lambda_+ Lambda_-, Xi_- = x^2 M_+ M_- written in (x, z).
struct XiPairO {
  double plus = 0.0;
  double minus = 0.0;
};

inline XiPairO xi_functions_o(double x, double z, const SubsystemOConstants& c, const BodyParams& params) {
  const OConstantsDerived d = derive_o(c, params);
  const double q = x * x + z * z - c.tau;
  const double tsc = 2.0 * c.s * d.chi;
  const double sx2 = 4.0 * c.s * c.s * x * x;
  return {(q + tsc) * (q + tsc) - sx2, (q - tsc) * (q - tsc) - sx2};
}

// Region test through Xi_+ >= 0, Xi_- <= 0 and the (s1, s2) rectangle.
inline bool region_o_xz(double x, double z, const SubsystemOConstants& c, const BodyParams& params,
                        double tol = 0.0) {
  const XiPairO xi = xi_functions_o(x, z, c, params);
  const SPoint sp = s_from_xz(x, z, params);
  const double a = params.a();
  const double b = params.b();
  return xi.plus >= -tol && xi.minus <= tol && sp.s1 * sp.s1 >= a * a - tol && sp.s2 * sp.s2 <= b * b + tol;
}

// ---------------------------------------------------------------------------
// The (t1, t2) change.

struct TPlanePointO {
  cplx x, xi, mu;
};

namespace detail {

inline void require_t_denominators(const SeparatedStateO& st, const char* who) {
  const double scale = std::max({1.0, std::abs(st.t1), std::abs(st.t2)});
  if (std::abs(st.t1 + st.t2) <= 1e-14 * scale) throw DomainError(std::string(who) + ": t1 + t2 = 0");
  if (std::abs(st.t1 - st.t2) <= 1e-14 * scale) throw DomainError(std::string(who) + ": t1 = t2");
}

inline TPlanePointO t_plane_point(const SeparatedStateO& st, const cplx& U1, const cplx& U2, double tau,
                                  double sigma) {
  const double sum = st.t1 + st.t2;
  const double stau = std::sqrt(std::abs(tau));
  const cplx rt = tau >= 0.0 ? cplx(stau, 0.0) : cplx(0.0, stau);
  TPlanePointO p;
  p.x = rt * (U1 + U2) / sum;
  p.xi = (st.t1 * st.t2 + sigma - U1 * U2) / sum;
  p.mu = rt * (st.t2 * U1 - st.t1 * U2) / sum;
  return p;
}

}  // namespace detail

// (x, xi, mu) from (t1, t2) with the branch's U1, U2, evaluated as printed:
// x = sqrt(tau)(U1 + U2)/(t1 + t2), xi = (t1 t2 + sigma - U1 U2)/(t1 + t2),
// mu = sqrt(tau)(t2 U1 - t1 U2)/(t1 + t2).
inline TPlanePointO point_from_t(const SeparatedStateO& st, const SubsystemOConstants& c, const BodyParams& params) {
  detail::require_t_denominators(st, "point_from_t");
  const RadicalTowerO w = radical_tower(st, c, params);
  if (std::abs(w.U1) + std::abs(w.U2) == 0.0) throw DomainError("point_from_t: U1 = U2 = 0 gives x = 0");
  return detail::t_plane_point(st, w.U1, w.U2, c.tau, derive_o(c, params).sigma);
}

// The same map with U2 replaced by -U2. This is the point onto which the
// reconstructed state of the branch projects: xi = R^2 / (t1 + t2).
inline TPlanePointO tower_point(const SeparatedStateO& st, const SubsystemOConstants& c, const BodyParams& params) {
  detail::require_t_denominators(st, "tower_point");
  const RadicalTowerO w = radical_tower(st, c, params);
  if (std::abs(w.U1) + std::abs(w.U2) == 0.0) throw DomainError("tower_point: U1 = U2 = 0 gives x = 0");
  return detail::t_plane_point(st, w.U1, -w.U2, c.tau, derive_o(c, params).sigma);
}

// Roots of 2 s mu^2 - (xi^2 - 4 s^2 (x^2 - tau) - sigma) mu + 2 s (tau xi^2 + sigma x^2 - tau sigma)
// in the form mu = 2 s tau + (sqrt(Psi1) +- sqrt(Psi2))^2 / (8 s), principal roots.
inline std::array<cplx, 2> mu_split(double x, double xi, const SubsystemOConstants& c, const BodyParams& params) {
  const OPolynomials o = o_polynomials(x, xi, c, params);
  const cplx a = std::sqrt(cplx(o.Psi1, 0.0));
  const cplx b = std::sqrt(cplx(o.Psi2, 0.0));
  const double s = c.s;
  return {2.0 * s * c.tau + (a + b) * (a + b) / (8.0 * s), 2.0 * s * c.tau + (a - b) * (a - b) / (8.0 * s)};
}

// mu_{1,2} = R^2 (4 s^2 tau + U1 U2 -+ V1 V2) / (2 s (t1 + t2)^2); mu_i = r^2 x_i - tau y_i.
inline std::array<cplx, 2> mu_from_tower(const SeparatedStateO& st, const SubsystemOConstants& c,
                                         const BodyParams& params) {
  detail::require_t_denominators(st, "mu_from_tower");
  const RadicalTowerO w = radical_tower(st, c, params);
  const double s = c.s;
  const double sum = st.t1 + st.t2;
  const cplx base = 4.0 * s * s * c.tau + w.U1 * w.U2;
  const cplx vv = w.V1 * w.V2;
  const cplx f = w.R * w.R / (2.0 * s * sum * sum);
  return {f * (base - vv), f * (base + vv)};
}

// Residuals of the two sum/product equations satisfied by (mu1, mu2).
inline std::array<double, 2> mu_system_residual(const std::array<cplx, 2>& mu, double x, double xi,
                                                const SubsystemOConstants& c, const BodyParams& params) {
  const double sigma = derive_o(c, params).sigma;
  const double s = c.s;
  const double tau = c.tau;
  const double sum_rhs = xi * xi - 4.0 * s * s * (x * x - tau) - sigma;
  const double prod_rhs = tau * xi * xi + sigma * x * x - tau * sigma;
  const cplx rs = 2.0 * s * (mu[0] + mu[1]) - sum_rhs;
  const cplx rp = mu[0] * mu[1] - prod_rhs;
  const double ss = std::max({1.0, std::abs(sum_rhs), std::abs(2.0 * s * mu[0]), std::abs(2.0 * s * mu[1])});
  const double sp = std::max({1.0, std::abs(prod_rhs), std::abs(mu[0] * mu[1])});
  return {std::abs(rs) / ss, std::abs(rp) / sp};
}

// ---------------------------------------------------------------------------
// Reconstruction.

struct ConfigurationO {
  cplx x1, x2, y1, y2, z1, z2;
};

inline ConfigurationO xy_complex_from_t(const SeparatedStateO& st, const SubsystemOConstants& c,
                                        const BodyParams& params) {
  detail::require_t_denominators(st, "xy_complex_from_t");
  const RadicalTowerO w = radical_tower(st, c, params);
  const double s = c.s;
  const double tau = c.tau;
  const double p2 = params.p2();
  const double r2 = params.r2();
  const double r = params.r();
  const double t1 = st.t1;
  const double t2 = st.t2;
  const cplx mn = w.M1 * w.N1 * w.M2 * w.N2;
  const cplx uu = w.U1 * w.U2;
  const cplx vv = w.V1 * w.V2;
  const cplx d1 = 4.0 * s * s * tau + uu + vv;
  const cplx d2 = 4.0 * s * s * tau + uu - vv;
  const double scale = std::max(1.0, std::abs(4.0 * s * s * tau) + std::abs(uu) + std::abs(vv));
  if (std::abs(d1) <= 1e-14 * scale || std::abs(d2) <= 1e-14 * scale) {
    throw DomainError("xy_complex_from_t: 4 s^2 tau + U1 U2 +- V1 V2 vanishes");
  }
  const cplx xb = (t1 + tau) * (t2 + tau) - r2 * r2;
  const cplx yb = tau * (t1 + t2 - 2.0 * p2 + 2.0 * tau) - uu;
  ConfigurationO o;
  o.x1 = 2.0 * s * tau / r2 * (xb + mn) / d1;
  o.x2 = 2.0 * s * tau / r2 * (xb - mn) / d2;
  o.y1 = 2.0 * s * (yb + mn) / d1;
  o.y2 = 2.0 * s * (yb - mn) / d2;
  const cplx zf = w.R / (std::sqrt(2.0) * r * (t1 + t2));
  o.z1 = zf * (w.M1 * w.M2 + w.N1 * w.N2);
  o.z2 = zf * (w.M1 * w.M2 - w.N1 * w.N2);
  return o;
}

// Full complex state through the configuration formulas and the complex
// angular velocities; an independent route to the real forms below.
inline ComplexState complex_state_o(const SeparatedStateO& st, const SubsystemOConstants& c,
                                    const BodyParams& params) {
  const ConfigurationO q = xy_complex_from_t(st, c, params);
  const RadicalTowerO w = radical_tower(st, c, params);
  const double s = c.s;
  const double r = params.r();
  const double sum = st.t1 + st.t2;
  const cplx a = w.M2 * w.N1 - w.M1 * w.N2;
  const cplx b = w.M2 * w.N1 + w.M1 * w.N2;
  const cplx u = w.U1 + w.U2;
  if (a == cplx(0.0) || b == cplx(0.0) || u == cplx(0.0) || w.sst == cplx(0.0)) {
    throw DomainError("complex_state_o: a denominator of the angular velocities vanishes");
  }
  ComplexState cs;
  cs.x1 = q.x1;
  cs.x2 = q.x2;
  cs.y1 = q.y1;
  cs.y2 = q.y2;
  cs.z1 = q.z1;
  cs.z2 = q.z2;
  cs.w3 = (w.M2 * w.N2 * w.V1 - w.M1 * w.N1 * w.V2) / (std::sqrt(2.0) * w.sst * u);
  cs.w1 = r * (w.U1 * w.V2 + w.U2 * w.V1) * w.R / (2.0 * s * w.sst * sum * a);
  cs.w2 = r * (w.U1 * w.V2 - w.U2 * w.V1) * w.R / (2.0 * s * w.sst * sum * b);
  return cs;
}

// (w1, w2) for the sign pair (e1, e2) of the intermediate radicals. Only
// e1 = e2 = -1 satisfies the two linear equations checked by linear_relations_residual;
// the family e2 = -e1 fails them.
inline std::array<cplx, 2> omega12_from_eps(const SeparatedStateO& st, const SubsystemOConstants& c,
                                            const BodyParams& params, int e1, int e2) {
  detail::require_t_denominators(st, "omega12_from_eps");
  const RadicalTowerO w = radical_tower(st, c, params);
  const double s = c.s;
  const double r = params.r();
  const double sum = st.t1 + st.t2;
  const cplx rt = std::sqrt(cplx(c.tau, 0.0));
  auto phi = [&](const cplx& u) { return 2.0 * s * rt + u; };
  auto psi = [&](const cplx& u) { return 2.0 * s * rt - u; };
  const double f1 = static_cast<double>(e1);
  const double f2 = static_cast<double>(e2);
  const cplx first = (f2 * phi(w.U2) - f1 * psi(w.U2)) * w.V1;
  const cplx second = (f1 * phi(w.U1) - f2 * psi(w.U1)) * w.V2;
  const cplx pre = r * w.R / (4.0 * s * w.sst);
  return {pre * (first + second) / (sum * (w.M1 * w.N2 - w.M2 * w.N1)),
          pre * (first - second) / (sum * (w.M1 * w.N2 + w.M2 * w.N1))};
}

// The two linear equations (y2 + 2s) w1 + x1 w2 + z1 w3 = 0 and
// x2 w1 + (y1 + 2s) w2 + z2 w3 = 0, each divided by its largest term.
inline std::array<double, 2> linear_relations_residual(const ComplexState& cs, double s) {
  const cplx a1 = (cs.y2 + 2.0 * s) * cs.w1;
  const cplx a2 = cs.x1 * cs.w2;
  const cplx a3 = cs.z1 * cs.w3;
  const cplx b1 = cs.x2 * cs.w1;
  const cplx b2 = (cs.y1 + 2.0 * s) * cs.w2;
  const cplx b3 = cs.z2 * cs.w3;
  return {detail::scaled(a1 + a2 + a3, detail::largest({a1, a2, a3})),
          detail::scaled(b1 + b2 + b3, detail::largest({b1, b2, b3}))};
}

// The nine phase values (omega, alpha, beta) in complex arithmetic from the
// real-variable forms of the solution.
inline std::array<cplx, 9> phase_values_o(const SeparatedStateO& st, const SubsystemOConstants& c,
                                          const BodyParams& params) {
  detail::require_t_denominators(st, "reconstruct_o");
  const RadicalTowerO w = radical_tower(st, c, params);
  const double s = c.s;
  const double tau = c.tau;
  const double p2 = params.p2();
  const double r2 = params.r2();
  const double r = params.r();
  const double t1 = st.t1;
  const double t2 = st.t2;
  const cplx I(0.0, 1.0);
  const cplx u = w.U1 + w.U2;
  if (u == cplx(0.0) || w.sst == cplx(0.0)) throw DomainError("reconstruct_o: U1 + U2 = 0 or s tau = 0");
  const double A = ((t1 + tau + r2) * (t2 + tau + r2) - 2.0 * (p2 + r2) * r2) * tau;
  const double B = ((t1 + tau - r2) * (t2 + tau - r2) + 2.0 * (p2 - r2) * r2) * tau;
  const cplx mn = w.M1 * w.N1 * w.M2 * w.N2;
  const cplx uu = w.U1 * w.U2;
  const cplx vv = w.V1 * w.V2;
  const cplx W = 4.0 * s * s * tau + uu;
  const cplx den = 4.0 * r2 * s * tau * u * u;
  const cplx za = w.R / (r * std::sqrt(2.0) * (t1 + t2));
  const cplx wf = w.R / (4.0 * r * s * w.sst * (t1 * t1 - t2 * t2));
  std::array<cplx, 9> v;
  v[0] = wf * (w.M2 * w.N1 * w.U1 * w.V2 + w.M1 * w.N2 * w.U2 * w.V1);
  v[1] = -I * wf * (w.M2 * w.N1 * w.U2 * w.V1 + w.M1 * w.N2 * w.U1 * w.V2);
  v[2] = (w.U1 - w.U2) / (std::sqrt(2.0) * w.sst) * (w.M2 * w.N2 * w.V1 - w.M1 * w.N1 * w.V2) / (t1 * t1 - t2 * t2);
  v[3] = ((A - r2 * uu) * W - (tau + r2) * mn * vv) / den;
  v[4] = I * ((A - r2 * uu) * vv - W * (tau + r2) * mn) / den;
  v[5] = za * w.M1 * w.M2;
  v[6] = I * ((B + r2 * uu) * vv - W * (tau - r2) * mn) / den;
  v[7] = -((B + r2 * uu) * W - (tau - r2) * mn * vv) / den;
  v[8] = -I * za * w.N1 * w.N2;
  return v;
}

struct BranchCheckO {
  double imaginary = 0.0;  // largest |Im| over max(1, state size)
  double geometric = 0.0;
  double relation = 0.0;
  double constants = 0.0;  // relative mismatch of (S, T) against (s, tau)
};

inline BranchCheckO check_branch_o(const std::array<cplx, 9>& v, const SubsystemOConstants& c,
                                   const BodyParams& params) {
  BranchCheckO out;
  double size = 1.0;
  for (const cplx& z : v) size = std::max(size, std::abs(z));
  for (const cplx& z : v) out.imaginary = std::max(out.imaginary, std::abs(z.imag()) / size);
  PhaseState y;
  y.omega = Vector3(v[0].real(), v[1].real(), v[2].real());
  y.alpha = Vector3(v[3].real(), v[4].real(), v[5].real());
  y.beta = Vector3(v[6].real(), v[7].real(), v[8].real());
  out.geometric = geometric_residuals(y, params).max_abs();
  const ComplexState cs = to_complex(y);
  if (cs.w1 == cplx(0.0) || cs.w2 == cplx(0.0)) {
    out.relation = 0.0;
    out.constants = 0.0;
    return out;
  }
  out.relation = normalized_residual_o(cs);
  const ComplexOConstants k = integrals_o_complex(cs);
  out.constants = std::max(std::abs(k.s - c.s) / std::max(1.0, std::abs(c.s)),
                           std::abs(k.tau - c.tau) / std::max(1.0, std::abs(c.tau)));
  return out;
}

// Real phase state of the branch. Throws RealityViolation when the branch
// gives a complex point (relative imaginary part above reality_tol) and
// BranchError when the real point is not on P and O with the level (s, tau).
inline PhaseState reconstruct_o(const SeparatedStateO& st, const SubsystemOConstants& c, const BodyParams& params,
                                double reality_tol = 1e-8, double membership_tol = 1e-7) {
  const std::array<cplx, 9> v = phase_values_o(st, c, params);
  const BranchCheckO chk = check_branch_o(v, c, params);
  if (!(chk.imaginary <= reality_tol)) {
    throw RealityViolation("reconstruct_o: branch is not real at (t1, t2) = (" + std::to_string(st.t1) + ", " +
                           std::to_string(st.t2) + "), relative imaginary part " + std::to_string(chk.imaginary));
  }
  if (!(chk.geometric <= membership_tol) || !(chk.relation <= membership_tol) ||
      !(chk.constants <= membership_tol)) {
    throw BranchError("reconstruct_o: branch fails the membership check (geometric " +
                      std::to_string(chk.geometric) + ", relation " + std::to_string(chk.relation) +
                      ", constants " + std::to_string(chk.constants) + ")");
  }
  PhaseState y;
  y.omega = Vector3(v[0].real(), v[1].real(), v[2].real());
  y.alpha = Vector3(v[3].real(), v[4].real(), v[5].real());
  y.beta = Vector3(v[6].real(), v[7].real(), v[8].real());
  return y;
}

inline PhaseState reconstruct_o_complex_route(const SeparatedStateO& st, const SubsystemOConstants& c,
                                              const BodyParams& params, double tol = 1e-8) {
  return from_complex(complex_state_o(st, c, params), tol);
}

// ---------------------------------------------------------------------------
// Separated equations.

// u^2 = F(t) = (4 s^2 chi^2 - t^2)(t^2 - sigma)(r^4 - (t + tau)^2) / (2 s tau),
// u_i = (t1 - t2) dt_i/dt.
inline double separated_poly_o(double t, const SubsystemOConstants& c, const BodyParams& params) {
  const OConstantsDerived d = derive_o(c, params);
  const double r4 = params.r2() * params.r2();
  const double vv = 4.0 * c.s * c.s * d.chi * d.chi;
  return (vv - t * t) * (t * t - d.sigma) * (r4 - (t + c.tau) * (t + c.tau)) / (2.0 * c.s * c.tau);
}

inline double separated_poly_o_derivative(double t, const SubsystemOConstants& c, const BodyParams& params) {
  const OConstantsDerived d = derive_o(c, params);
  const double r4 = params.r2() * params.r2();
  const double vv = 4.0 * c.s * c.s * d.chi * d.chi;
  const double f1 = vv - t * t;
  const double f2 = t * t - d.sigma;
  const double f3 = r4 - (t + c.tau) * (t + c.tau);
  return (-2.0 * t * f2 * f3 + f1 * 2.0 * t * f3 - f1 * f2 * 2.0 * (t + c.tau)) / (2.0 * c.s * c.tau);
}

namespace detail {

// Signed u_i = i U_i V_i M_i N_i / sqrt(2 s tau) of the branch, complex.
inline cplx separated_velocity_o(const RadicalTowerO& w, int i) {
  const cplx I(0.0, 1.0);
  const cplx num = i == 0 ? w.U1 * w.V1 * w.M1 * w.N1 : w.U2 * w.V2 * w.M2 * w.N2;
  return I * num / (std::sqrt(2.0) * w.sst);
}

}  // namespace detail

inline std::array<double, 2> separated_rhs_o(const SeparatedStateO& st, const SubsystemOConstants& c,
                                             const BodyParams& params, double tol = 1e-8) {
  detail::require_t_denominators(st, "separated_rhs_o");
  const RadicalTowerO w = radical_tower(st, c, params);
  std::array<double, 2> out{};
  for (int i = 0; i < 2; ++i) {
    const cplx u = detail::separated_velocity_o(w, i);
    if (std::abs(u.imag()) > tol * std::max(1.0, std::abs(u))) {
      throw RealityViolation("separated_rhs_o: velocity of t" + std::to_string(i + 1) + " is not real");
    }
    out[static_cast<std::size_t>(i)] = u.real() / (st.t1 - st.t2);
  }
  return out;
}

// Radicand factors that make F(t_i) negative.
inline std::vector<std::string> violated_radicands_o(double t1, double t2, const SubsystemOConstants& c,
                                                     const BodyParams& params, double tol = 0.0) {
  const OConstantsDerived d = derive_o(c, params);
  const double r4 = params.r2() * params.r2();
  const double vv = 4.0 * c.s * c.s * d.chi * d.chi;
  std::vector<std::string> out;
  const double t[2] = {t1, t2};
  for (int i = 0; i < 2; ++i) {
    const double f = separated_poly_o(t[i], c, params);
    const double scale = std::max(1.0, std::abs(f));
    if (f >= -tol * scale) continue;
    const std::string ti = "t" + std::to_string(i + 1);
    out.push_back("F(" + ti + ") = " + std::to_string(f) + " [4 s^2 chi^2 - " + ti + "^2 = " +
                  std::to_string(vv - t[i] * t[i]) + ", " + ti + "^2 - sigma = " +
                  std::to_string(t[i] * t[i] - d.sigma) + ", r^4 - (" + ti + " + tau)^2 = " +
                  std::to_string(r4 - (t[i] + c.tau) * (t[i] + c.tau)) + "]");
  }
  return out;
}

// Jacobian of (2 s (mu1 + mu2), mu1 mu2) with respect to (mu1, mu2): the
// fiber part of the map to the (x, xi) plane. Singular where mu1 = mu2, i.e.
// where Psi1 Psi2 = Xi_+ Xi_- vanishes.
inline Eigen::Matrix2cd o_fiber_jacobian(double x, double xi, const SubsystemOConstants& c,
                                         const BodyParams& params) {
  const auto mu = mu_split(x, xi, c, params);
  Eigen::Matrix2cd j;
  j << cplx(2.0 * c.s, 0.0), cplx(2.0 * c.s, 0.0), mu[1], mu[0];
  return j;
}

// ---------------------------------------------------------------------------
// Branch enumeration.

struct BranchO {
  BranchBitsO signs{};
  PhaseState state;
};

inline BranchBitsO branch_bits_from_mask(int mask) {
  BranchBitsO b{};
  for (int k = 0; k < 11; ++k) b[static_cast<std::size_t>(k)] = (mask >> k) & 1 ? -1 : 1;
  return b;
}

namespace detail {

inline void add_distinct(std::vector<BranchO>& out, const BranchBitsO& bits, const PhaseState& y, double tol) {
  for (const BranchO& b : out) {
    if (max_abs_diff(b.state, y) <= tol * std::max(1.0, y.max_abs())) return;
  }
  out.push_back({bits, y});
}

}  // namespace detail

// Distinct real reconstructions over all 2^11 sign assignments, each with
// the first assignment that produced it.
inline std::vector<BranchO> enumerate_branches_o(double t1, double t2, const SubsystemOConstants& c,
                                                 const BodyParams& params, double dedup_tol = 1e-9) {
  std::vector<BranchO> out;
  for (int mask = 0; mask < 2048; ++mask) {
    const SeparatedStateO st{t1, t2, branch_bits_from_mask(mask)};
    try {
      detail::add_distinct(out, st.signs, reconstruct_o(st, c, params), dedup_tol);
    } catch (const RealityViolation&) {
    } catch (const BranchError&) {
    }
  }
  return out;
}

// Admissible sign assignments cached per cell of the (t1, t2) plane. Cells
// are bounded by the roots of the radicands, so the key is the sign pattern
// of the real radicands (and of t1 + t2, t1 - t2).
class BranchCacheO {
 public:
  BranchCacheO(const SubsystemOConstants& c, const BodyParams& params) : c_(c), params_(params) {
    derived_ = derive_o(c_, params_);
  }

  std::vector<BranchO> branches(double t1, double t2) {
    const std::vector<int> key = cell_key(t1, t2);
    auto it = cells_.find(key);
    if (it != cells_.end()) {
      std::vector<BranchO> out;
      bool ok = true;
      for (const BranchBitsO& bits : it->second) {
        try {
          detail::add_distinct(out, bits, reconstruct_o({t1, t2, bits}, c_, params_), 1e-9);
        } catch (const Error&) {
          ok = false;
          break;
        }
      }
      if (ok && out.size() == it->second.size()) {
        ++hits_;
        return out;
      }
    }
    ++misses_;
    std::vector<BranchO> out = enumerate_branches_o(t1, t2, c_, params_);
    std::vector<BranchBitsO> reps;
    for (const BranchO& b : out) reps.push_back(b.signs);
    cells_[key] = reps;
    return out;
  }

  std::vector<int> cell_key(double t1, double t2) const {
    auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    const double r2 = params_.r2();
    const double vv = 4.0 * c_.s * c_.s * derived_.chi * derived_.chi;
    std::vector<int> key{sgn(t1 + t2), sgn(t1 - t2)};
    for (double t : {t1, t2}) {
      key.push_back(sgn(vv - t * t));
      key.push_back(sgn(t + c_.tau + r2));
      key.push_back(sgn(t + c_.tau - r2));
      if (derived_.sigma > 0.0) {
        const double k = std::sqrt(derived_.sigma);
        key.push_back(sgn(t + k));
        key.push_back(sgn(t - k));
      }
    }
    return key;
  }

  long hits() const { return hits_; }
  long misses() const { return misses_; }

 private:
  SubsystemOConstants c_;
  BodyParams params_;
  OConstantsDerived derived_;
  std::map<std::vector<int>, std::vector<BranchBitsO>> cells_;
  long hits_ = 0;
  long misses_ = 0;
};

// ---------------------------------------------------------------------------
// Separated integration.

class SeparatedSystemO {
 public:
  using Bits = BranchBitsO;

  SeparatedSystemO(const SubsystemOConstants& c, const BodyParams& params) : c_(c), params_(params) {
    params_.require_two_fields("sov_o");
    d_ = derive_o(c_, params_);
  }

  double time_factor(double q1, double q2) const { return 1.0 / (q1 - q2); }
  bool stops_on_diagonal() const { return true; }

  double poly(int, double q) const { return separated_poly_o(q, c_, params_); }
  double poly_derivative(int, double q) const { return separated_poly_o_derivative(q, c_, params_); }

  std::vector<TurningRoot> turning_roots(int i) const {
    const double r2 = params_.r2();
    const double v = 2.0 * std::abs(c_.s) * d_.chi;
    const int vb = i == 0 ? kV1 : kV2;
    const int mb = i == 0 ? kM1 : kM2;
    const int nb = i == 0 ? kN1 : kN2;
    std::vector<TurningRoot> out{{-v, vb, radical_o_name(vb)},
                                 {v, vb, radical_o_name(vb)},
                                 {-c_.tau - r2, mb, radical_o_name(mb)},
                                 {-c_.tau + r2, nb, radical_o_name(nb)}};
    if (d_.sigma > 0.0) {
      const double k = std::sqrt(d_.sigma);
      const int kb = i == 0 ? kK1 : kK2;
      const int lb = i == 0 ? kL1 : kL2;
      out.push_back({-k, kb, radical_o_name(kb)});
      out.push_back({k, lb, radical_o_name(lb)});
    }
    return out;
  }

  double velocity(int i, double q, const Bits& bits) const {
    SeparatedStateO st{i == 0 ? q : 0.0, i == 1 ? q : 0.0, bits};
    return detail::separated_velocity_o(radical_tower(st, c_, params_), i).real();
  }

 private:
  SubsystemOConstants c_;
  BodyParams params_;
  OConstantsDerived d_;
};

using SeparatedTrajectoryO = SeparatedTrajectory<BranchBitsO>;

// Throws AdmissibilityError listing the violated radicands when (t1, t2) is
// outside the accessible region, RealityViolation when the point is inside
// but the chosen branch is complex.
inline SeparatedTrajectoryO integrate_separated_o(const SeparatedStateO& st0, const SubsystemOConstants& c,
                                                  const BodyParams& params, double t0, double t1,
                                                  const IntegrationConfig& cfg) {
  const auto bad = violated_radicands_o(st0.t1, st0.t2, c, params, 1e-12);
  if (!bad.empty()) {
    std::string msg = "inadmissible separated state (t1, t2) = (" + std::to_string(st0.t1) + ", " +
                      std::to_string(st0.t2) + "): negative radicands";
    for (const auto& b : bad) msg += "; " + b;
    throw AdmissibilityError(msg);
  }
  reconstruct_o(st0, c, params);
  const SeparatedSystemO sys(c, params);
  return integrate_separated(sys, st0.t1, st0.t2, st0.signs, t0, t1, cfg);
}

inline SeparatedStateO separated_state_o(const SeparatedTrajectoryO& traj, const SubsystemOConstants& c,
                                         const BodyParams& params, double t) {
  const StateVec<4> y = traj.state_at(t);
  SeparatedStateO st{y[0], y[1], traj.bits_at(t)};
  snap_onto_roots(SeparatedSystemO(c, params), st.t1, st.t2);
  return st;
}

}  // namespace kowalevski
