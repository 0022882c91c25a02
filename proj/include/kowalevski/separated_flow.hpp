#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "kowalevski/errors.hpp"
#include "kowalevski/integrator.hpp"

namespace kowalevski {

// A simple root of one factor of a separated polynomial and the radical whose
// sign flips when the coordinate turns there.
struct TurningRoot {
  double value = 0.0;
  int bit = -1;
  std::string radical;
};

struct TurningEvent {
  double t = 0.0;
  int coordinate = 0;
  double root = 0.0;
  double q_before = 0.0;
  int bit = -1;
  std::string radical;
};

template <class Bits>
struct BitChange {
  double t = 0.0;
  Bits bits{};
};

// Solution of a separated system in the regularized variables (q1, q2, u1, u2)
// with u_i^2 = F_i(q_i), together with the branch history.
template <class Bits>
struct SeparatedTrajectory {
  Trajectory<4> raw;
  std::vector<TurningEvent> turning_events;
  std::vector<BitChange<Bits>> bit_log;
  Termination status = Termination::Completed;
  std::string diagnostic;

  double t_end() const { return raw.t_end(); }

  // Bits in force at time t; at an event time the bits after the flip.
  const Bits& bits_at(double t) const {
    auto it = std::upper_bound(bit_log.begin(), bit_log.end(), t,
                               [](double v, const BitChange<Bits>& b) { return v < b.t; });
    if (it == bit_log.begin()) return bit_log.front().bits;
    return std::prev(it)->bits;
  }

  StateVec<4> state_at(double t) const { return raw.interpolate(t); }
};

// Integrates q_i' = kappa u_i, u_i' = kappa F_i'(q_i) / 2 with
// kappa = sys.time_factor(q1, q2). A zero of u_i is a turning point: q_i is
// snapped onto the nearest radicand root, u_i is set to zero and the sign bit
// of the vanishing radical flips.
//
// System provides: Bits, time_factor, poly, poly_derivative, turning_roots,
// velocity, and stops_on_diagonal (true when kappa is singular at q1 = q2).
template <class System>
SeparatedTrajectory<typename System::Bits> integrate_separated(const System& sys, double q1, double q2,
                                                               typename System::Bits bits, double t0,
                                                               double t1, const IntegrationConfig& cfg) {
  using Bits = typename System::Bits;
  const double q[2] = {q1, q2};
  StateVec<4> y0;
  y0 << q1, q2, 0.0, 0.0;

  const double root_tol = 1e-9;
  for (int i = 0; i < 2; ++i) {
    const double f = sys.poly(i, q[i]);
    const double kappa = sys.time_factor(q1, q2);
    const double fp = sys.poly_derivative(i, q[i]);
    const double scale = std::max(1.0, std::abs(fp));
    if (std::abs(f) > root_tol * scale) {
      y0[2 + i] = sys.velocity(i, q[i], bits);
      continue;
    }
    // Start on a turning point: pick the sign of the vanishing radical that
    // matches the direction of departure.
    const auto roots = sys.turning_roots(i);
    const TurningRoot* nearest = nullptr;
    for (const TurningRoot& r : roots) {
      if (nearest == nullptr || std::abs(r.value - q[i]) < std::abs(nearest->value - q[i])) nearest = &r;
    }
    if (nearest == nullptr || fp == 0.0) continue;
    const double dir = fp > 0.0 ? 1.0 : -1.0;
    const double probe = sys.velocity(i, q[i] + 1e-7 * dir * std::max(1.0, std::abs(q[i])), bits);
    const double expected = kappa * fp;
    if (probe * expected < 0.0) bits[static_cast<std::size_t>(nearest->bit)] *= -1;
  }

  SeparatedTrajectory<Bits> out;
  out.bit_log.push_back({t0, bits});
  Bits current = bits;

  auto rhs = [&sys](double, const StateVec<4>& y) {
    const double kappa = sys.time_factor(y[0], y[1]);
    StateVec<4> d;
    d << kappa * y[2], kappa * y[3], 0.5 * kappa * sys.poly_derivative(0, y[0]),
        0.5 * kappa * sys.poly_derivative(1, y[1]);
    return d;
  };

  std::vector<EventSpec<4>> events;
  for (int i = 0; i < 2; ++i) {
    EventSpec<4> ev;
    ev.g = [i](double, const StateVec<4>& y) { return y[2 + i]; };
    ev.action = [i, &sys, &current, &out](double t, StateVec<4>& y) {
      EventAction act;
      const double qi = y[i];
      const auto roots = sys.turning_roots(i);
      const TurningRoot* nearest = nullptr;
      for (const TurningRoot& r : roots) {
        if (nearest == nullptr || std::abs(r.value - qi) < std::abs(nearest->value - qi)) nearest = &r;
      }
      const double snap_tol = 1e-6 * std::max(1.0, std::abs(qi));
      if (nearest == nullptr || std::abs(nearest->value - qi) > snap_tol) {
        act.stop = true;
        act.note = "velocity of coordinate " + std::to_string(i + 1) +
                   " vanished away from every radicand root at q = " + std::to_string(qi);
        return act;
      }
      const double fp = sys.poly_derivative(i, nearest->value);
      if (std::abs(fp) <= 1e-10) {
        act.stop = true;
        act.note = "double root of the separated polynomial at q" + std::to_string(i + 1) + " = " +
                   std::to_string(nearest->value);
        return act;
      }
      TurningEvent te;
      te.t = t;
      te.coordinate = i;
      te.root = nearest->value;
      te.q_before = qi;
      te.bit = nearest->bit;
      te.radical = nearest->radical;
      out.turning_events.push_back(te);
      y[i] = nearest->value;
      y[2 + i] = 0.0;
      current[static_cast<std::size_t>(nearest->bit)] *= -1;
      out.bit_log.push_back({t, current});
      act.flipped_bit = nearest->bit;
      act.note = "turning point of coordinate " + std::to_string(i + 1) + " at root of " + nearest->radical;
      return act;
    };
    events.push_back(ev);
  }
  if (sys.stops_on_diagonal()) {
    const double side = q1 > q2 ? 1.0 : -1.0;
    const double guard = 1e-6 * std::max(1.0, std::abs(q1) + std::abs(q2));
    EventSpec<4> ev;
    ev.g = [side, guard](double, const StateVec<4>& y) { return side * (y[0] - y[1]) - guard; };
    ev.action = [](double t, StateVec<4>&) {
      EventAction act;
      act.stop = true;
      act.note = "separated coordinates collide (q1 = q2) at t = " + std::to_string(t) +
                 "; the separated equations are singular there";
      return act;
    };
    events.push_back(ev);
  }

  // Where a radicand of degree four is nonnegative on an unbounded interval
  // the coordinate reaches infinity in finite time (q' ~ q^2). The chart of
  // separated coordinates ends there, so stop instead of underflowing.
  const double escape = 1e6 * std::max({1.0, std::abs(q1), std::abs(q2)});
  for (int i = 0; i < 2; ++i) {
    EventSpec<4> ev;
    ev.g = [i, escape](double, const StateVec<4>& y) { return escape - std::abs(y[i]); };
    ev.direction = -1;
    ev.action = [i, escape](double t, StateVec<4>&) {
      EventAction act;
      act.stop = true;
      act.note = "coordinate " + std::to_string(i + 1) + " leaves every bounded set (|q" + std::to_string(i + 1) +
                 "| > " + std::to_string(escape) + ") at t = " + std::to_string(t) +
                 "; the separated chart ends there";
      return act;
    };
    events.push_back(ev);
  }

  out.raw = integrate_adaptive<4>(rhs, y0, t0, t1, cfg, events);
  out.status = out.raw.status;
  out.diagnostic = out.raw.diagnostic;
  return out;
}

// Moves a coordinate that sits beyond a turning root by less than tol back
// onto the root. Dense output can overshoot a turning point by rounding.
template <class System>
void snap_onto_roots(const System& sys, double& q1, double& q2, double tol = 1e-8) {
  double* q[2] = {&q1, &q2};
  for (int i = 0; i < 2; ++i) {
    if (sys.poly(i, *q[i]) >= 0.0) continue;
    for (const TurningRoot& r : sys.turning_roots(i)) {
      if (std::abs(r.value - *q[i]) <= tol * std::max(1.0, std::abs(r.value))) {
        *q[i] = r.value;
        break;
      }
    }
  }
}

}  // namespace kowalevski
