#include <gtest/gtest.h>

#include <cmath>

#include "kowalevski/integrator.hpp"
#include "kowalevski/rigid_core.hpp"
#include "oracles.hpp"

using namespace kowalevski;

namespace {

PhaseState rest_state() {
  PhaseState y;
  y.alpha = Vector3(1.0, 0.0, 0.0);
  y.beta = Vector3(0.0, 0.4, 0.0);
  return y;
}

}  // namespace

TEST(BodyParams, DerivedInvariants) {
  const BodyParams p(1.0, 0.4);
  EXPECT_DOUBLE_EQ(p.p2(), 1.16);
  EXPECT_DOUBLE_EQ(p.r2(), 1.0 - 0.16);
  EXPECT_GT(p.p2(), p.r2());
  EXPECT_THROW(BodyParams(0.4, 1.0), DomainError);
  EXPECT_THROW(BodyParams(1.0, -0.1), DomainError);
  EXPECT_NO_THROW(BodyParams(1.0, 0.0));
  EXPECT_THROW(BodyParams(1.0, 0.0).require_two_fields("x"), DomainError);
}

TEST(EomRhs, RestStateIsEquilibrium) {
  const PhaseState d = eom_rhs(rest_state());
  EXPECT_EQ(d.to_vector().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(is_equilibrium(rest_state()));
}

TEST(EomRhs, SpinAboutSymmetryAxis) {
  PhaseState y = rest_state();
  y.omega = Vector3(0.0, 0.0, 1.0);
  const PhaseState d = eom_rhs(y);
  EXPECT_DOUBLE_EQ(d.alpha[0], 0.0);
  EXPECT_DOUBLE_EQ(d.alpha[1], -1.0);
  EXPECT_DOUBLE_EQ(d.alpha[2], 0.0);
}

TEST(EomRhs, MatchesComponentwiseOracle) {
  oracle::Rng rng(11);
  for (int n = 0; n < 200; ++n) {
    const PhaseState y = oracle::random_state(rng);
    const auto ref = oracle::eom(oracle::pack(y));
    const PhaseVector d = eom_rhs(y.to_vector());
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(d[i], ref[static_cast<std::size_t>(i)], 1e-14);
  }
}

TEST(EomRhs, FiniteDifferenceOfFlowMap) {
  oracle::Rng rng(12);
  const PhaseState y = oracle::random_p_state(rng, 1.0, 0.4);
  const PhaseVector d = eom_rhs(y.to_vector());
  for (double dt : {1e-3, 1e-4}) {
    const PhaseState yp = oracle::rk4_flow(y, dt, 1);
    const PhaseVector fd = (yp.to_vector() - y.to_vector()) / dt;
    EXPECT_LT((fd - d).cwiseAbs().maxCoeff(), 10.0 * dt);
  }
}

TEST(EomRhs, TangentToConstraints) {
  oracle::Rng rng(13);
  for (int n = 0; n < 1000; ++n) {
    const PhaseState y = oracle::random_state(rng);
    const PhaseState d = eom_rhs(y);
    EXPECT_LT(std::abs(2.0 * y.alpha.dot(d.alpha)), 1e-13);
    EXPECT_LT(std::abs(2.0 * y.beta.dot(d.beta)), 1e-13);
    EXPECT_LT(std::abs(d.alpha.dot(y.beta) + y.alpha.dot(d.beta)), 1e-13);
  }
}

TEST(GeneralIntegrals, RestValues) {
  const IntegralValues v = general_integrals(rest_state(), BodyParams(1.0, 0.4));
  EXPECT_NEAR(v.h, -1.4, 1e-15);
  EXPECT_NEAR(v.k, 0.36, 1e-15);
  EXPECT_NEAR(v.g, -0.56, 1e-15);
}

TEST(GeneralIntegrals, MatchOracleAndKNonnegative) {
  oracle::Rng rng(14);
  for (int n = 0; n < 500; ++n) {
    const PhaseState y = oracle::random_state(rng);
    const IntegralValues v = general_integrals(y, BodyParams(1.0, 0.4));
    const oracle::HKG o = oracle::integrals(y, 1.0, 0.4);
    EXPECT_NEAR(v.h, o.h, 1e-12 * std::max(1.0, std::abs(o.h)));
    EXPECT_NEAR(v.k, o.k, 1e-12 * std::max(1.0, std::abs(o.k)));
    EXPECT_NEAR(v.g, o.g, 1e-12 * std::max(1.0, std::abs(o.g)));
    EXPECT_GE(v.k, 0.0);
  }
}

TEST(GeneralIntegrals, ConservedAlongFlow) {
  oracle::Rng rng(15);
  const BodyParams params(1.0, 0.4);
  const PhaseState y0 = oracle::random_p_state(rng, 1.0, 0.4);
  auto rhs = [](double, const PhaseVector& y) { return PhaseVector(eom_rhs(y)); };
  const auto traj = integrate_adaptive<9>(rhs, y0.to_vector(), 0.0, 10.0, IntegrationConfig{});
  const IntegralValues v0 = general_integrals(y0, params);
  for (const PhaseVector& v : traj.y) {
    const PhaseState y = PhaseState::from_vector(v);
    const IntegralValues vi = general_integrals(y, params);
    EXPECT_LT(std::abs(vi.h - v0.h), 1e-8 * std::max(1.0, std::abs(v0.h)));
    EXPECT_LT(std::abs(vi.k - v0.k), 1e-8 * std::max(1.0, std::abs(v0.k)));
    EXPECT_LT(std::abs(vi.g - v0.g), 1e-8 * std::max(1.0, std::abs(v0.g)));
    EXPECT_LT(geometric_residuals(y, params).max_abs(), 1e-8);
  }
}

TEST(GeometricResiduals, Examples) {
  const BodyParams p(1.0, 0.4);
  EXPECT_EQ(geometric_residuals(rest_state(), p).max_abs(), 0.0);
  PhaseState y = rest_state();
  y.beta = Vector3(0.1, 0.4, 0.0);
  EXPECT_NEAR(geometric_residuals(y, p).dot, 0.1, 1e-15);
}

TEST(FieldInvariants, Examples) {
  const FieldInvariants f = field_invariants(Vector3(1, 0, 0), Vector3(0, 0.4, 0));
  EXPECT_NEAR(f.p, std::sqrt(1.16), 1e-15);
  EXPECT_NEAR(f.r, std::sqrt(0.84), 1e-15);
  const FieldInvariants g = field_invariants(Vector3(1, 0, 0), Vector3(1, 0, 0));
  EXPECT_NEAR(g.p, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.r, std::sqrt(2.0), 1e-15);
  const FieldInvariants h = field_invariants(Vector3(1, 0, 0), Vector3(0, 1, 0));
  EXPECT_NEAR(h.p, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(h.r, 0.0, 1e-15);
}

TEST(FieldInvariants, InvariantUnderFrameRotation) {
  oracle::Rng rng(16);
  const PhaseState y = oracle::random_state(rng);
  const FieldInvariants f0 = field_invariants(y.alpha, y.beta);
  for (int n = 0; n < 100; ++n) {
    const PhaseState z = rotate_field_frame(y, rng.uniform(-M_PI, M_PI));
    const FieldInvariants f = field_invariants(z.alpha, z.beta);
    EXPECT_NEAR(f.p, f0.p, 1e-12);
    EXPECT_NEAR(f.r, f0.r, 1e-12);
  }
}

TEST(RotateFieldFrame, CommutesWithFlow) {
  oracle::Rng rng(17);
  for (int n = 0; n < 50; ++n) {
    const PhaseState y = oracle::random_state(rng);
    const double th = rng.uniform(-M_PI, M_PI);
    const PhaseState lhs = eom_rhs(rotate_field_frame(y, th));
    // The map is linear, so its differential is itself.
    const PhaseState rhs = rotate_field_frame(eom_rhs(y), th);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-13);
  }
}

TEST(NormalizeFieldFrame, OrthogonalPairUnchanged) {
  PhaseState y = rest_state();
  y.omega = Vector3(0.3, -0.2, 0.7);
  const NormalizedFrame nf = normalize_field_frame(y);
  EXPECT_EQ(nf.theta, 0.0);
  EXPECT_EQ(max_abs_diff(nf.state, y), 0.0);
}

TEST(NormalizeFieldFrame, GenericPair) {
  oracle::Rng rng(18);
  for (int n = 0; n < 100; ++n) {
    const PhaseState y = oracle::random_state(rng);
    const NormalizedFrame nf = normalize_field_frame(y);
    EXPECT_LT(std::abs(nf.state.alpha.dot(nf.state.beta)), 1e-12);
    EXPECT_GE(nf.state.alpha.norm(), nf.state.beta.norm());
    const FieldInvariants f0 = field_invariants(y.alpha, y.beta);
    const FieldInvariants f1 = field_invariants(nf.state.alpha, nf.state.beta);
    EXPECT_NEAR(f0.p, f1.p, 1e-12);
    EXPECT_NEAR(f0.r, f1.r, 1e-12);
  }
}

// H and K are frame-independent. The printed G uses a^2, b^2 and so holds only
// for an orthogonal pair; its covariant form is compared instead.
TEST(NormalizeFieldFrame, IntegralsPreserved) {
  oracle::Rng rng(19);
  for (int n = 0; n < 100; ++n) {
    const PhaseState y = oracle::random_state(rng);
    const NormalizedFrame nf = normalize_field_frame(y);
    const BodyParams params = params_from_pair(nf.state.alpha, nf.state.beta);
    const IntegralValues before = covariant_integrals(y);
    const IntegralValues after = general_integrals(nf.state, params);
    EXPECT_NEAR(before.h, after.h, 1e-10 * std::max(1.0, std::abs(before.h)));
    EXPECT_NEAR(before.k, after.k, 1e-10 * std::max(1.0, std::abs(before.k)));
    EXPECT_NEAR(before.g, after.g, 1e-10 * std::max(1.0, std::abs(before.g)));
  }
}

TEST(NormalizeFieldFrame, DegeneratePairRejected) {
  PhaseState y;
  y.alpha = Vector3(1.0, 0.0, 0.0);
  y.beta = Vector3(2.0, 0.0, 0.0);
  EXPECT_THROW(normalize_field_frame(y), DomainError);
}

TEST(CovariantIntegrals, ConservedAndEqualOnP) {
  oracle::Rng rng(20);
  const PhaseState y = oracle::random_p_state(rng, 1.0, 0.4);
  const IntegralValues c = covariant_integrals(y);
  const IntegralValues g = general_integrals(y, BodyParams(1.0, 0.4));
  EXPECT_NEAR(c.g, g.g, 1e-12);

  const PhaseState z = oracle::random_state(rng);
  const IntegralValues c0 = covariant_integrals(z);
  const IntegralValues c1 = covariant_integrals(oracle::rk4_flow(z, 1.0, 4000));
  EXPECT_NEAR(c0.g, c1.g, 1e-9 * std::max(1.0, std::abs(c0.g)));
}

TEST(IsEquilibrium, MovingStateIsNot) {
  oracle::Rng rng(21);
  EXPECT_FALSE(is_equilibrium(oracle::random_p_state(rng, 1.0, 0.4)));
}
