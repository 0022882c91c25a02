#include <gtest/gtest.h>

#include <cmath>

#include "kowalevski/integrator.hpp"
#include "kowalevski/rigid_core.hpp"
#include "oracles.hpp"

using namespace kowalevski;

namespace {

auto oscillator = [](double, const StateVec<2>& y) {
  StateVec<2> d;
  d << y[1], -y[0];
  return d;
};

}  // namespace

TEST(IntegrateAdaptive, HarmonicOscillatorPeriod) {
  StateVec<2> y0(1.0, 0.0);
  const auto traj = integrate_adaptive<2>(oscillator, y0, 0.0, 2.0 * M_PI, IntegrationConfig{});
  EXPECT_LT((traj.y.back() - y0).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(traj.t.back(), 2.0 * M_PI);
  for (std::size_t i = 1; i < traj.t.size(); ++i) EXPECT_GT(traj.t[i], traj.t[i - 1]);
}

TEST(IntegrateAdaptive, DenseOutputIsAccurate) {
  StateVec<2> y0(1.0, 0.0);
  IntegrationConfig cfg;
  const auto traj = integrate_adaptive<2>(oscillator, y0, 0.0, 5.0, cfg);
  for (double t = 0.0; t <= 5.0; t += 0.0371) {
    const StateVec<2> y = traj.interpolate(t);
    EXPECT_NEAR(y[0], std::cos(t), 1e-7);
    EXPECT_NEAR(y[1], -std::sin(t), 1e-7);
  }
  EXPECT_THROW(traj.interpolate(5.5), DomainError);
}

TEST(IntegrateAdaptive, FixedStepMode) {
  IntegrationConfig cfg;
  cfg.fixed_step = 0.01;
  const auto traj = integrate_adaptive<2>(oscillator, StateVec<2>(1.0, 0.0), 0.0, 1.0, cfg);
  EXPECT_NEAR(traj.y.back()[0], std::cos(1.0), 1e-10);
  EXPECT_EQ(traj.rejected_steps, 0);
}

TEST(IntegrateAdaptive, FullFlowKeepsConstraints) {
  oracle::Rng rng(41);
  const BodyParams params(1.0, 0.4);
  const PhaseState y0 = oracle::random_p_state(rng, 1.0, 0.4);
  auto rhs = [](double, const PhaseVector& y) { return PhaseVector(eom_rhs(y)); };
  const auto traj = integrate_adaptive<9>(rhs, y0.to_vector(), 0.0, 10.0, IntegrationConfig{});
  for (const PhaseVector& v : traj.y) {
    EXPECT_LT(geometric_residuals(PhaseState::from_vector(v), params).max_abs(), 1e-8);
  }
  // Independent fixed-step RK4 with a tiny step agrees with the end point.
  const PhaseState ref = oracle::rk4_flow(y0, 10.0, 40000);
  EXPECT_LT((traj.y.back() - ref.to_vector()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(IntegrateAdaptive, EventLocatedAndStateJumps) {
  // Falling body y'' = -1 from height 1 with a bounce that reverses velocity.
  auto fall = [](double, const StateVec<2>& y) {
    StateVec<2> d;
    d << y[1], -1.0;
    return d;
  };
  EventSpec<2> bounce;
  bounce.g = [](double, const StateVec<2>& y) { return y[0]; };
  bounce.direction = -1;
  bounce.action = [](double, StateVec<2>& y) {
    y[1] = -y[1];
    EventAction a;
    a.flipped_bit = 0;
    return a;
  };
  IntegrationConfig cfg;
  const auto traj = integrate_adaptive<2>(fall, StateVec<2>(1.0, 0.0), 0.0, 3.0, cfg, {bounce});
  ASSERT_EQ(traj.events.size(), 1u);
  EXPECT_NEAR(traj.events[0].t, std::sqrt(2.0), 1e-11);
  EXPECT_NEAR(traj.events[0].y_before[1], -std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(traj.events[0].y_after[1], std::sqrt(2.0), 1e-9);
  // After the bounce the body rises to height 1 again at t = 2 sqrt(2).
  EXPECT_NEAR(traj.interpolate(2.0 * std::sqrt(2.0))[0], 1.0, 1e-8);
  EXPECT_EQ(traj.status, Termination::Completed);
}

TEST(IntegrateAdaptive, StoppingEvent) {
  EventSpec<2> ev;
  ev.g = [](double, const StateVec<2>& y) { return y[0]; };
  ev.action = [](double, StateVec<2>&) {
    EventAction a;
    a.stop = true;
    a.note = "stop";
    return a;
  };
  const auto traj = integrate_adaptive<2>(oscillator, StateVec<2>(1.0, 0.0), 0.0, 10.0, IntegrationConfig{}, {ev});
  EXPECT_EQ(traj.status, Termination::StoppedByEvent);
  EXPECT_NEAR(traj.t.back(), M_PI / 2.0, 1e-11);
  EXPECT_EQ(traj.diagnostic, "stop");
}

TEST(IntegrateAdaptive, StepUnderflowNearSingularity) {
  // y' = 1 / (1 - t) blows up at t = 1.
  auto rhs = [](double t, const StateVec<1>&) {
    StateVec<1> d;
    d << 1.0 / (1.0 - t);
    return d;
  };
  EXPECT_THROW(integrate_adaptive<1>(rhs, StateVec<1>(0.0), 0.0, 2.0, IntegrationConfig{}), NumericalError);
}

TEST(IntegrateAdaptive, InputValidation) {
  IntegrationConfig bad;
  bad.rel_tol = -1.0;
  EXPECT_THROW(integrate_adaptive<2>(oscillator, StateVec<2>(1.0, 0.0), 0.0, 1.0, bad), DomainError);
  EXPECT_THROW(integrate_adaptive<2>(oscillator, StateVec<2>(1.0, 0.0), 1.0, 1.0, IntegrationConfig{}),
               DomainError);
}

TEST(DriftReport, MeasuresRelativeChange) {
  const auto traj = integrate_adaptive<2>(oscillator, StateVec<2>(2.0, 0.0), 0.0, 10.0, IntegrationConfig{});
  const auto drift = drift_report<2>(traj, {[](const StateVec<2>& y) { return y.squaredNorm(); },
                                            [](const StateVec<2>& y) { return y[0]; }});
  EXPECT_LT(drift[0], 1e-8);
  EXPECT_GT(drift[1], 1.0);
}
