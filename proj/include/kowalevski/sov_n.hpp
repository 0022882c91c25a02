#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "kowalevski/complex_chart.hpp"
#include "kowalevski/critical_set.hpp"
#include "kowalevski/errors.hpp"
#include "kowalevski/integrator.hpp"
#include "kowalevski/rigid_core.hpp"
#include "kowalevski/separated_flow.hpp"

namespace kowalevski {

// Sign bits of the radicals S1, phi1, S2, phi2 (entries +1 or -1).
enum RadicalN : int { kS1 = 0, kPhi1 = 1, kS2 = 2, kPhi2 = 3 };
using BranchBitsN = std::array<int, 4>;

struct SeparatedStateN {
  double s1 = 0.0;
  double s2 = 0.0;
  BranchBitsN eps{1, 1, 1, 1};
};

inline double phi_n(double s, const SubsystemNConstants& c) {
  c.validate();
  return 4.0 * c.m * s * s - 4.0 * c.ell * s + (c.ell * c.ell - 1.0) / c.m;
}

inline double psi_n(double s1, double s2, const SubsystemNConstants& c) {
  c.validate();
  return 4.0 * c.m * s1 * s2 - 2.0 * c.ell * (s1 + s2) + (c.ell * c.ell - 1.0) / c.m;
}

inline double phi_n_derivative(double s, const SubsystemNConstants& c) {
  return 8.0 * c.m * s - 4.0 * c.ell;
}

// The four radicands s1^2 - a^2, -Phi(s1), b^2 - s2^2, Phi(s2).
inline std::array<double, 4> radicands_n(double s1, double s2, const SubsystemNConstants& c,
                                         const BodyParams& params) {
  const double a = params.a();
  const double b = params.b();
  return {s1 * s1 - a * a, -phi_n(s1, c), b * b - s2 * s2, phi_n(s2, c)};
}

inline std::vector<std::string> violated_radicands_n(double s1, double s2, const SubsystemNConstants& c,
                                                     const BodyParams& params, double tol = 0.0) {
  static const char* const names[4] = {"s1^2 - a^2", "-Phi(s1)", "b^2 - s2^2", "Phi(s2)"};
  const auto rad = radicands_n(s1, s2, c, params);
  std::vector<std::string> out;
  for (int k = 0; k < 4; ++k) {
    if (rad[static_cast<std::size_t>(k)] < -tol) {
      out.push_back(std::string(names[k]) + " = " + std::to_string(rad[static_cast<std::size_t>(k)]));
    }
  }
  return out;
}

inline bool region_n(double s1, double s2, const SubsystemNConstants& c, const BodyParams& params,
                     double tol = 0.0) {
  return violated_radicands_n(s1, s2, c, params, tol).empty();
}

namespace detail {

inline void require_admissible_n(double s1, double s2, const SubsystemNConstants& c, const BodyParams& params,
                                 double tol) {
  const auto bad = violated_radicands_n(s1, s2, c, params, tol);
  if (bad.empty()) return;
  std::string msg = "inadmissible separated state (s1, s2) = (" + std::to_string(s1) + ", " +
                    std::to_string(s2) + "): negative radicands";
  for (const auto& b : bad) msg += "; " + b;
  throw AdmissibilityError(msg);
}

}  // namespace detail

struct RadicalsN {
  double S1, phi1, S2, phi2;
};

// Signed radicals of the branch; radicands within tol below zero count as zero.
inline RadicalsN radicals_n(const SeparatedStateN& st, const SubsystemNConstants& c, const BodyParams& params,
                            double tol = 1e-12) {
  c.validate();
  params.require_two_fields("sov_n");
  detail::require_admissible_n(st.s1, st.s2, c, params, tol);
  const auto rad = radicands_n(st.s1, st.s2, c, params);
  auto root = [](double v) { return std::sqrt(std::max(0.0, v)); };
  return {st.eps[kS1] * root(rad[0]), st.eps[kPhi1] * root(rad[1]), st.eps[kS2] * root(rad[2]),
          st.eps[kPhi2] * root(rad[3])};
}

inline std::array<double, 2> separated_rhs_n(const SeparatedStateN& st, const SubsystemNConstants& c,
                                             const BodyParams& params) {
  const RadicalsN r = radicals_n(st, c, params);
  return {0.5 * r.S1 * r.phi1, 0.5 * r.S2 * r.phi2};
}

// Phase state of the separated point without the membership check.
inline PhaseState reconstruct_n_unchecked(const SeparatedStateN& st, const SubsystemNConstants& c,
                                          const BodyParams& params) {
  const RadicalsN rad = radicals_n(st, c, params);
  const double s1 = st.s1;
  const double s2 = st.s2;
  const double a2 = params.a() * params.a();
  const double b2 = params.b() * params.b();
  const double r = params.r();
  const double d = s1 - s2;
  const double psi = psi_n(s1, s2, c);
  const double ss = rad.S1 * rad.S2;
  const double ff = rad.phi1 * rad.phi2;
  PhaseState y;
  y.alpha = Vector3(((s1 * s2 - a2) * psi + ss * ff) / (2.0 * d * d), ((s1 * s2 - a2) * ff - ss * psi) / (2.0 * d * d),
                    r * rad.S1 / d);
  y.beta = Vector3(-((s1 * s2 - b2) * ff - ss * psi) / (2.0 * d * d), ((s1 * s2 - b2) * psi + ss * ff) / (2.0 * d * d),
                   r * rad.S2 / d);
  // omega3 carries the opposite sign and a plus between the two products
  // compared with the form (S2 phi1 - S1 phi2) / d; only this form satisfies
  // the first invariant relation of N.
  y.omega = Vector3(r / (2.0 * d) * (c.ell - 2.0 * c.m * s1) * rad.phi2,
                    r / (2.0 * d) * (c.ell - 2.0 * c.m * s2) * rad.phi1, -(rad.S2 * rad.phi1 + rad.S1 * rad.phi2) / d);
  return y;
}

struct BranchCheckN {
  double geometric = 0.0;
  double relation = 0.0;
};

inline BranchCheckN check_branch_n(const PhaseState& y, const BodyParams& params) {
  BranchCheckN out;
  out.geometric = geometric_residuals(y, params).max_abs();
  const ComplexState cs = to_complex(y);
  out.relation = normalized_residual_n(cs);
  return out;
}

// Phase state of the separated point. Throws BranchError when the result is
// not on the constrained phase space and on N within tol.
inline PhaseState reconstruct_n(const SeparatedStateN& st, const SubsystemNConstants& c, const BodyParams& params,
                                double tol = 1e-9) {
  const PhaseState y = reconstruct_n_unchecked(st, c, params);
  const BranchCheckN chk = check_branch_n(y, params);
  if (!(chk.geometric <= tol) || !(chk.relation <= tol)) {
    throw BranchError("reconstruct_n: branch fails the membership check (geometric " +
                      std::to_string(chk.geometric) + ", relation " + std::to_string(chk.relation) + ")");
  }
  return y;
}

// All sign assignments whose reconstruction passes the branch filter.
inline std::vector<BranchBitsN> admissible_branches_n(double s1, double s2, const SubsystemNConstants& c,
                                                      const BodyParams& params, double tol = 1e-9) {
  std::vector<BranchBitsN> out;
  for (int mask = 0; mask < 16; ++mask) {
    SeparatedStateN st{s1, s2, {}};
    for (int k = 0; k < 4; ++k) st.eps[static_cast<std::size_t>(k)] = (mask >> k) & 1 ? -1 : 1;
    try {
      reconstruct_n(st, c, params, tol);
      out.push_back(st.eps);
    } catch (const BranchError&) {
    }
  }
  return out;
}

// Separated system of N in the form consumed by integrate_separated:
// u_i = ds_i/dt, u_1^2 = (s1^2 - a^2)(-Phi(s1)) / 4, u_2^2 = (b^2 - s2^2) Phi(s2) / 4.
class SeparatedSystemN {
 public:
  using Bits = BranchBitsN;

  SeparatedSystemN(const SubsystemNConstants& c, const BodyParams& params) : c_(c), params_(params) {
    c_.validate();
    params_.require_two_fields("sov_n");
  }

  double time_factor(double, double) const { return 1.0; }
  bool stops_on_diagonal() const { return false; }

  double poly(int i, double q) const {
    const double a2 = params_.a() * params_.a();
    const double b2 = params_.b() * params_.b();
    if (i == 0) return -0.25 * (q * q - a2) * phi_n(q, c_);
    return 0.25 * (b2 - q * q) * phi_n(q, c_);
  }

  double poly_derivative(int i, double q) const {
    const double a2 = params_.a() * params_.a();
    const double b2 = params_.b() * params_.b();
    const double ph = phi_n(q, c_);
    const double dph = phi_n_derivative(q, c_);
    if (i == 0) return -0.25 * (2.0 * q * ph + (q * q - a2) * dph);
    return 0.25 * (-2.0 * q * ph + (b2 - q * q) * dph);
  }

  std::vector<TurningRoot> turning_roots(int i) const {
    const double edge = i == 0 ? params_.a() : params_.b();
    const int edge_bit = i == 0 ? kS1 : kS2;
    const int phi_bit = i == 0 ? kPhi1 : kPhi2;
    const std::string edge_name = i == 0 ? "S1" : "S2";
    const std::string phi_name = i == 0 ? "phi1" : "phi2";
    return {{-edge, edge_bit, edge_name},
            {edge, edge_bit, edge_name},
            {(c_.ell - 1.0) / (2.0 * c_.m), phi_bit, phi_name},
            {(c_.ell + 1.0) / (2.0 * c_.m), phi_bit, phi_name}};
  }

  double velocity(int i, double q, const Bits& bits) const {
    const double a2 = params_.a() * params_.a();
    const double b2 = params_.b() * params_.b();
    const double ph = phi_n(q, c_);
    if (i == 0) {
      return 0.5 * bits[kS1] * std::sqrt(std::max(0.0, q * q - a2)) * bits[kPhi1] * std::sqrt(std::max(0.0, -ph));
    }
    return 0.5 * bits[kS2] * std::sqrt(std::max(0.0, b2 - q * q)) * bits[kPhi2] * std::sqrt(std::max(0.0, ph));
  }

 private:
  SubsystemNConstants c_;
  BodyParams params_;
};

using SeparatedTrajectoryN = SeparatedTrajectory<BranchBitsN>;

inline SeparatedTrajectoryN integrate_separated_n(const SeparatedStateN& st0, const SubsystemNConstants& c,
                                                  const BodyParams& params, double t0, double t1,
                                                  const IntegrationConfig& cfg) {
  radicals_n(st0, c, params);
  const SeparatedSystemN sys(c, params);
  return integrate_separated(sys, st0.s1, st0.s2, st0.eps, t0, t1, cfg);
}

// Separated state of the trajectory at time t (position from dense output,
// branch from the event log).
inline SeparatedStateN separated_state_n(const SeparatedTrajectoryN& traj, const SubsystemNConstants& c,
                                         const BodyParams& params, double t) {
  const StateVec<4> y = traj.state_at(t);
  SeparatedStateN st{y[0], y[1], traj.bits_at(t)};
  snap_onto_roots(SeparatedSystemN(c, params), st.s1, st.s2);
  return st;
}

}  // namespace kowalevski
