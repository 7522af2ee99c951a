#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rampguard/error.hpp"
#include "rampguard/traffic_core.hpp"
#include "support/oracles.hpp"

using namespace rampguard;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

DerivedConstants mode_constants(int id) {
  return derive_mode_constants(find_mode(reference_modes(), id), GlobalParams{});
}

}  // namespace

TEST(TrafficCore, ReferenceModesSatisfyFluxIdentity) {
  for (const auto& m : reference_modes())
    EXPECT_LT(rel(m.rho_star * m.v_star, m.q_star), 1e-9) << "mode " << m.id;
}

TEST(TrafficCore, DerivedConstantsMatchHighPrecisionOracle) {
  for (const auto& o : oracle::mode_constants()) {
    const DerivedConstants d = mode_constants(o.mode);
    EXPECT_LT(rel(d.p_star, o.p_star), 1e-12);
    EXPECT_LT(rel(d.h, o.h), 1e-12);
    EXPECT_LT(rel(d.l, o.l), 1e-12);
    EXPECT_LT(rel(d.c, o.c), 1e-12);
    EXPECT_LT(rel(d.tau_gp, o.tau_gp), 1e-12);
  }
}

TEST(TrafficCore, ModeOneWorkedValues) {
  const DerivedConstants d = mode_constants(1);
  EXPECT_DOUBLE_EQ(d.p_star, 18.75);
  EXPECT_DOUBLE_EQ(d.h, 2.125);
  EXPECT_NEAR(d.l, 0.06218, 5e-6);
  EXPECT_NEAR(d.c, 0.194302, 5e-6);
}

TEST(TrafficCore, ConstantsInSupportedRegime) {
  for (const auto& m : reference_modes()) {
    const DerivedConstants d = derive_mode_constants(m, GlobalParams{});
    EXPECT_GT(d.h, 0.0);
    EXPECT_GT(d.l, 0.0);
    EXPECT_LT(d.l, 1.0);
    EXPECT_GT(d.c, 0.0);
  }
}

TEST(TrafficCore, CongestedModeRejected) {
  ModeParams m{9, 25.0, 0.02, 20.0, 0.4, 1.0};  // gamma p* = 3.125 < v*
  try {
    derive_mode_constants(m, GlobalParams{});
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::config);
  }
}

TEST(TrafficCore, BetaDecaysFromMinusInverseTau) {
  const DerivedConstants d = mode_constants(1);
  EXPECT_DOUBLE_EQ(d.beta(0.0), -1.0 / 60.0);
  EXPECT_NEAR(d.beta(1000.0), -std::exp(-1000.0 / 360.0) / 60.0, 1e-15);
}

TEST(TrafficCore, PressureExamples) {
  const GlobalParams g;
  const ModeParams m1 = find_mode(reference_modes(), 1);
  EXPECT_EQ(pressure(0.0, m1, g), 0.0);
  EXPECT_DOUBLE_EQ(pressure(g.rho_max, m1, g), 25.0);
  EXPECT_DOUBLE_EQ(pressure(0.12, m1, g), 18.75);
  EXPECT_THROW(pressure(-0.01, m1, g), Error);
}

TEST(TrafficCore, PressureStrictlyIncreasingOnRandomGrids) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rho(0.0, 0.16);
  std::uniform_real_distribution<double> gam(0.5, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    GlobalParams g;
    g.gamma = gam(rng);
    double a = rho(rng), b = rho(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    EXPECT_LT(pressure(a, 25.0, g), pressure(b, 25.0, g));
  }
}

TEST(TrafficCore, EquilibriumVelocityResidual) {
  const GlobalParams g;
  const auto modes = reference_modes();
  EXPECT_NEAR(equilibrium_velocity_residual(find_mode(modes, 1), g), 0.25, 1e-12);
  EXPECT_NEAR(equilibrium_velocity_residual(find_mode(modes, 2), g), 0.5, 1e-12);
  const ModeParams exact =
      apply_equilibrium_policy(find_mode(modes, 1), g, EquilibriumPolicy::exact);
  EXPECT_NEAR(equilibrium_velocity_residual(exact, g), 0.0, 1e-12);
}

TEST(TrafficCore, ChangeOfVariablesExamples) {
  const DerivedConstants d = mode_constants(1);
  const WV zero = to_wv(0.0, 0.0, 321.0, d);
  EXPECT_EQ(zero.w, 0.0);
  EXPECT_EQ(zero.v, 0.0);
  const WV a = to_wv(0.01, 0.0, 0.0, d);
  EXPECT_DOUBLE_EQ(a.w, 0.01);
  EXPECT_EQ(a.v, 0.0);
  const WV b = to_wv(0.0, 0.1, 0.0, d);
  EXPECT_NEAR(b.w, -0.00816, 1e-15);
  EXPECT_NEAR(b.v, 0.00384, 1e-15);
  const FluxVelocity back = from_wv(0.01, 0.0, 0.0, d);
  EXPECT_DOUBLE_EQ(back.q, 0.01);
  EXPECT_EQ(back.v, 0.0);
  const FluxVelocity rt = from_wv(to_wv(0.01, 0.1, 500.0, d).w, to_wv(0.01, 0.1, 500.0, d).v,
                                  500.0, d);
  EXPECT_NEAR(rt.q, 0.01, 1e-14);
  EXPECT_NEAR(rt.v, 0.1, 1e-14);
}

TEST(TrafficCore, ChangeOfVariablesRoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dq(-0.2, 0.2), dv(-3.0, 3.0), xs(0.0, 1000.0);
  for (int id = 1; id <= 3; ++id) {
    const DerivedConstants d = mode_constants(id);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double q = dq(rng), v = dv(rng), x = xs(rng);
      const WV wv = to_wv(q, v, x, d);
      const FluxVelocity b = from_wv(wv.w, wv.v, x, d);
      const double scale = std::max(std::abs(q), std::abs(v));
      worst = std::max({worst, std::abs(b.q - q) / scale, std::abs(b.v - v) / scale});
    }
    EXPECT_LT(worst, 1e-10) << "mode " << id;
  }
}

TEST(TrafficCore, MismatchExamples) {
  const DerivedConstants d1 = mode_constants(1), d2 = mode_constants(2);
  const ThetaSet t = mismatch_params(d1, d2, 0.3);
  EXPECT_DOUBLE_EQ(t.theta_v, 1.0);
  EXPECT_NEAR(t.theta_q, -0.12, 1e-15);
  EXPECT_NEAR(t.theta_h, 0.0893, 5e-5);
  EXPECT_DOUBLE_EQ(t.theta_k, t.theta_l - 0.3 * t.theta_c);
}

TEST(TrafficCore, MatchedMismatchIsExactlyZero) {
  for (int id = 1; id <= 3; ++id) {
    const DerivedConstants d = mode_constants(id);
    const ThetaSet t = mismatch_params(d, d, 0.7);
    EXPECT_EQ(t.theta_v, 0.0);
    EXPECT_EQ(t.theta_hv, 0.0);
    EXPECT_EQ(t.theta_h, 0.0);
    EXPECT_EQ(t.theta_q, 0.0);
    EXPECT_EQ(t.theta_l, 0.0);
    EXPECT_EQ(t.theta_c, 0.0);
    EXPECT_EQ(t.theta_k, 0.0);
    for (double x : {0.0, 250.0, 1000.0}) EXPECT_EQ(t.theta_beta(x), 0.0);
  }
}

TEST(TrafficCore, UnknownModeIsConfigError) {
  try {
    find_mode(reference_modes(), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::config);
  }
}

TEST(TrafficCore, GlobalValidation) {
  GlobalParams g;
  g.n_cells = 4;
  EXPECT_THROW(g.validate(), Error);
  g = GlobalParams{};
  g.cfl = 1.5;
  EXPECT_THROW(g.validate(), Error);
  EXPECT_NO_THROW(GlobalParams{}.validate());
}
