#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "kowalevski/errors.hpp"

namespace kowalevski {

template <int N>
using StateVec = Eigen::Matrix<double, N, 1>;

struct IntegrationConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double event_tol = 1e-12;
  // Zero selects the automatic initial step.
  double initial_step = 0.0;
  // Nonzero switches off adaptivity and takes steps of exactly this size.
  double fixed_step = 0.0;
  long max_steps = 5'000'000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) || !(event_tol > 0.0) ||
        initial_step < 0.0 || fixed_step < 0.0 || max_steps <= 0) {
      throw DomainError("IntegrationConfig: tolerances and step limits must be positive");
    }
  }
};

// What an event action did to the state.
struct EventAction {
  bool stop = false;
  int flipped_bit = -1;
  std::string note;
};

template <int N>
struct EventSpec {
  // Scalar function whose zero crossings are events.
  std::function<double(double, const StateVec<N>&)> g;
  // 0: any crossing, +1: only rising, -1: only falling.
  int direction = 0;
  // May modify the state in place. An empty action records the event only.
  std::function<EventAction(double, StateVec<N>&)> action;
};

template <int N>
struct EventRecord {
  double t = 0.0;
  int event_id = -1;
  int flipped_bit = -1;
  bool stop = false;
  std::string note;
  StateVec<N> y_before;
  StateVec<N> y_after;
};

enum class Termination { Completed, StoppedByEvent };

template <int N>
struct Trajectory {
  struct Segment {
    double t0, t1;
    StateVec<N> y0, y1, f0, f1;
  };

  std::vector<double> t;
  std::vector<StateVec<N>> y;
  std::vector<EventRecord<N>> events;
  std::vector<Segment> segments;
  Termination status = Termination::Completed;
  std::string diagnostic;
  long rejected_steps = 0;

  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }

  // Cubic Hermite interpolation on the accepted step containing tq.
  StateVec<N> interpolate(double tq) const {
    if (segments.empty()) {
      if (!t.empty() && tq == t.front()) return y.front();
      throw DomainError("Trajectory::interpolate: empty trajectory");
    }
    if (tq < segments.front().t0 || tq > segments.back().t1) {
      throw DomainError("Trajectory::interpolate: time outside the integrated span");
    }
    auto it = std::upper_bound(segments.begin(), segments.end(), tq,
                               [](double v, const Segment& s) { return v < s.t1; });
    if (it == segments.end()) it = segments.end() - 1;
    const Segment& s = *it;
    const double h = s.t1 - s.t0;
    if (h == 0.0) return s.y1;
    const double th = (tq - s.t0) / h;
    const double th2 = th * th;
    const double th3 = th2 * th;
    const double h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    const double h10 = th3 - 2.0 * th2 + th;
    const double h01 = -2.0 * th3 + 3.0 * th2;
    const double h11 = th3 - th2;
    return h00 * s.y0 + h10 * h * s.f0 + h01 * s.y1 + h11 * h * s.f1;
  }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                          b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
};

template <int N>
struct StepResult {
  StateVec<N> y;
  StateVec<N> f;
  StateVec<N> err;
};

template <int N, class Rhs>
StepResult<N> dp_step(const Rhs& rhs, double t, const StateVec<N>& y, const StateVec<N>& k1,
                           double h) {
  using T = DormandPrince;
  const StateVec<N> k2 = rhs(t + T::c2 * h, StateVec<N>(y + h * (T::a21 * k1)));
  const StateVec<N> k3 = rhs(t + T::c3 * h, StateVec<N>(y + h * (T::a31 * k1 + T::a32 * k2)));
  const StateVec<N> k4 =
      rhs(t + T::c4 * h, StateVec<N>(y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3)));
  const StateVec<N> k5 = rhs(
      t + T::c5 * h, StateVec<N>(y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4)));
  const StateVec<N> k6 =
      rhs(t + h, StateVec<N>(y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 +
                                      T::a65 * k5)));
  StepResult<N> out;
  out.y = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
  out.f = rhs(t + h, out.y);
  out.err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * out.f);
  return out;
}

template <int N>
double error_norm(const StateVec<N>& err, const StateVec<N>& y0, const StateVec<N>& y1,
                  const IntegrationConfig& cfg) {
  double acc = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

inline bool crossed(double g0, double g1, int direction) {
  if (g0 == 0.0) return false;
  const bool change = (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
  if (!change) return false;
  if (direction > 0) return g0 < 0.0;
  if (direction < 0) return g0 > 0.0;
  return true;
}

}  // namespace detail

// Adaptive Dormand-Prince 5(4) with PI step control, Hermite dense output and
// event location by bisection on exact sub-steps from the step start.
template <int N, class Rhs>
Trajectory<N> integrate_adaptive(const Rhs& rhs, const StateVec<N>& y0, double t0, double t1,
                                 const IntegrationConfig& cfg,
                                 const std::vector<EventSpec<N>>& events = {}) {
  cfg.validate();
  if (!(t1 > t0)) throw DomainError("integrate_adaptive: empty time span");
  if (!y0.allFinite()) throw DomainError("integrate_adaptive: non-finite initial state");

  Trajectory<N> traj;
  traj.t.push_back(t0);
  traj.y.push_back(y0);

  double t = t0;
  StateVec<N> y = y0;
  StateVec<N> f = rhs(t, y);
  if (!f.allFinite()) throw NumericalError("integrate_adaptive: non-finite derivative at start");

  const bool adaptive = cfg.fixed_step == 0.0;
  double h = cfg.fixed_step;
  if (adaptive) {
    h = cfg.initial_step;
    if (h == 0.0) {
      double d0 = 0.0, d1 = 0.0;
      for (int i = 0; i < y.size(); ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
        d0 = std::max(d0, std::abs(y[i]) / sc);
        d1 = std::max(d1, std::abs(f[i]) / sc);
      }
      h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
      h = std::min(h, 0.1 * (t1 - t0));
    }
  }
  h = std::min(h, cfg.max_step);

  constexpr double kBeta = 0.04;
  constexpr double kAlpha = 0.2 - 0.75 * kBeta;
  double err_prev = 1e-4;
  bool last_rejected = false;
  std::vector<double> g_now(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) g_now[e] = events[e].g(t, y);

  for (long step = 0; t < t1; ++step) {
    if (step >= cfg.max_steps) throw NumericalError("integrate_adaptive: step budget exhausted");
    const double remaining = t1 - t;
    double hs = std::min({h, remaining, cfg.max_step});
    const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (hs < h_floor && hs < remaining) {
      throw NumericalError("integrate_adaptive: step size underflow at t = " + std::to_string(t));
    }

    auto res = detail::dp_step<N>(rhs, t, y, f, hs);
    double en = adaptive ? detail::error_norm<N>(res.err, y, res.y, cfg) : 0.0;
    if (!res.y.allFinite() || !res.f.allFinite()) en = std::numeric_limits<double>::infinity();

    if (adaptive && en > 1.0) {
      ++traj.rejected_steps;
      const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -kAlpha)) : 0.2;
      h = hs * fac;
      last_rejected = true;
      continue;
    }
    if (!adaptive && !res.y.allFinite()) {
      throw NumericalError("integrate_adaptive: non-finite state with fixed step");
    }

    double t_new = t + hs;
    if (hs == remaining) t_new = t1;

    // Earliest event inside the accepted step.
    int hit = -1;
    double hit_t = t_new;
    StateVec<N> hit_y = res.y;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const double g1 = events[e].g(t_new, res.y);
      if (!detail::crossed(g_now[e], g1, events[e].direction)) continue;
      double lo = t, hi = t_new;
      const double g_lo = g_now[e];
      StateVec<N> y_hi = res.y;
      while (hi - lo > cfg.event_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const StateVec<N> y_mid = detail::dp_step<N>(rhs, t, y, f, mid - t).y;
        const double g_mid = events[e].g(mid, y_mid);
        if ((g_lo < 0.0) == (g_mid < 0.0) && g_mid != 0.0) {
          lo = mid;
        } else {
          hi = mid;
          y_hi = y_mid;
        }
      }
      if (hit < 0 || hi < hit_t) {
        hit = static_cast<int>(e);
        hit_t = hi;
        hit_y = y_hi;
      }
    }

    if (hit >= 0) {
      const StateVec<N> f_hit = rhs(hit_t, hit_y);
      traj.segments.push_back({t, hit_t, y, hit_y, f, f_hit});
      EventRecord<N> rec;
      rec.t = hit_t;
      rec.event_id = hit;
      rec.y_before = hit_y;
      StateVec<N> y_after = hit_y;
      if (events[static_cast<std::size_t>(hit)].action) {
        const EventAction act = events[static_cast<std::size_t>(hit)].action(hit_t, y_after);
        rec.stop = act.stop;
        rec.flipped_bit = act.flipped_bit;
        rec.note = act.note;
      }
      rec.y_after = y_after;
      traj.events.push_back(rec);
      t = hit_t;
      y = y_after;
      f = rhs(t, y);
      traj.t.push_back(t);
      traj.y.push_back(y);
      for (std::size_t e = 0; e < events.size(); ++e) g_now[e] = events[e].g(t, y);
      if (rec.stop) {
        traj.status = Termination::StoppedByEvent;
        traj.diagnostic = rec.note;
        return traj;
      }
      // Restart with a modest step after the state jump.
      if (adaptive) h = std::max(hs * 0.5, h_floor * 4.0);
      last_rejected = false;
      continue;
    }

    traj.segments.push_back({t, t_new, y, res.y, f, res.f});
    t = t_new;
    y = res.y;
    f = res.f;
    traj.t.push_back(t);
    traj.y.push_back(y);
    for (std::size_t e = 0; e < events.size(); ++e) g_now[e] = events[e].g(t, y);

    if (adaptive) {
      const double en_c = std::max(en, 1e-10);
      double fac = 0.9 * std::pow(en_c, -kAlpha) * std::pow(err_prev, kBeta);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = hs * fac;
      err_prev = en_c;
      last_rejected = false;
    }
  }
  return traj;
}

// Max over samples of |F(y(t)) - F(y(t0))| / max(1, |F(y(t0))|) per functional.
template <int N>
std::vector<double> drift_report(const Trajectory<N>& traj,
                                 const std::vector<std::function<double(const StateVec<N>&)>>& functionals) {
  std::vector<double> out(functionals.size(), 0.0);
  if (traj.y.empty()) return out;
  for (std::size_t k = 0; k < functionals.size(); ++k) {
    const double f0 = functionals[k](traj.y.front());
    const double scale = std::max(1.0, std::abs(f0));
    for (const StateVec<N>& y : traj.y) {
      out[k] = std::max(out[k], std::abs(functionals[k](y) - f0) / scale);
    }
  }
  return out;
}

}  // namespace kowalevski
