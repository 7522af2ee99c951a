#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "rampguard/error.hpp"
#include "rampguard/lmi_certifier.hpp"
#include "support/oracles.hpp"

using namespace rampguard;
using quad = boost::multiprecision::cpp_bin_float_quad;

namespace {

double rel(double a, double b) {
  if (b == 0.0) return std::abs(a);
  return std::abs(a - b) / std::abs(b);
}

Eigen::Matrix3d random_symmetric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = r; c < 3; ++c) m(r, c) = m(c, r) = u(rng);
  return m;
}

}  // namespace

TEST(LmiCertifier, NsdExamples) {
  EXPECT_TRUE(nsd_check(-Eigen::Matrix3d::Identity()));
  EXPECT_FALSE(nsd_check(Eigen::Vector3d(1, -1, -1).asDiagonal().toDenseMatrix()));
  Eigen::Matrix3d m;
  m << 0, -1, -1, -1, 0, 0, -1, 0, 0;
  EXPECT_FALSE(nsd_check(m));
  const auto ev = oracle::symmetric_eigenvalues(m);
  EXPECT_NEAR(ev[0], -std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(ev[2], std::sqrt(2.0), 1e-12);
  m << -2, -1, -1, -1, -2, 0, -1, 0, -2;
  EXPECT_EQ(nsd_check(m), oracle::symmetric_eigenvalues(m)[2] <= 1e-9);
}

TEST(LmiCertifier, NsdRejectsAsymmetricInput) {
  Eigen::Matrix3d m = -Eigen::Matrix3d::Identity();
  m(0, 1) = 0.5;
  try {
    nsd_check(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::domain);
  }
}

TEST(LmiCertifier, NsdAgreesWithCubicOracleOnRandomMatrices) {
  std::mt19937_64 rng(20);
  int disagreements = 0;
  for (int k = 0; k < 10000; ++k) {
    Eigen::Matrix3d m = random_symmetric(rng);
    // push half of the samples towards the semidefinite boundary
    if (k % 2) m -= (oracle::symmetric_eigenvalues(m)[2] + 1e-6 * (k % 3 - 1)) * Eigen::Matrix3d::Identity();
    if (nsd_check(m, 1e-9) != (oracle::symmetric_eigenvalues(m)[2] <= 1e-9)) ++disagreements;
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(LmiCertifier, TableParametersMatchFrozenOracle) {
  const TuningParams t = oracle::table_tuning();
  for (const auto& c : oracle::table_cases()) {
    const ParamSet p = table1_params(c.inputs, t);
    for (const auto& [name, expected] : c.expected)
      EXPECT_LT(rel(oracle::field(p, name), expected), 1e-12) << name;
  }
}

TEST(LmiCertifier, QuadPrecisionReevaluationAgrees) {
  const TuningParams t = oracle::table_tuning();
  for (const auto& c : oracle::table_cases()) {
    const ParamSet p = table1_params(c.inputs, t);
    const auto pq = table1_params_t<quad>(c.inputs, t);
    for (const auto& [name, expected] : c.expected) {
      const double hi = static_cast<double>(oracle::field(pq, name));
      EXPECT_LT(rel(hi, expected), 1e-14) << name;
      EXPECT_LT(rel(oracle::field(p, name), hi), 1e-12) << name;
    }
  }
}

TEST(LmiCertifier, VerdictStableUnderQuadPrecision) {
  const TuningParams t = oracle::table_tuning();
  for (const auto& c : oracle::table_cases()) {
    const PairCertificate lo = check_theorem1(table1_params(c.inputs, t), c.inputs.k3, t);
    const auto pq = table1_params_t<quad>(c.inputs, t);
    ParamSet p;
    p.ups7_radicand = static_cast<double>(pq.ups7_radicand);
    p.ups8 = static_cast<double>(pq.ups8);
    p.ups8_bar = static_cast<double>(pq.ups8_bar);
    p.ups9 = static_cast<double>(pq.ups9);
    p.ups10 = static_cast<double>(pq.ups10);
    p.ups11 = static_cast<double>(pq.ups11);
    p.ups12 = static_cast<double>(pq.ups12);
    p.ups13 = static_cast<double>(pq.ups13);
    p.ups14 = static_cast<double>(pq.ups14);
    p.ups15 = static_cast<double>(pq.ups15);
    p.ups17 = static_cast<double>(pq.ups17);
    p.ups18 = static_cast<double>(pq.ups18);
    p.ups_theta = static_cast<double>(pq.ups_theta);
    p.mismatch_ratio = static_cast<double>(pq.mismatch_ratio);
    const PairCertificate hi = check_theorem1(p, c.inputs.k3, t);
    EXPECT_EQ(lo.es_aurs, hi.es_aurs);
    EXPECT_EQ(lo.robustness, hi.robustness);
    EXPECT_EQ(lo.sensitivity_literal, hi.sensitivity_literal);
    EXPECT_EQ(lo.sensitivity_flipped, hi.sensitivity_flipped);
  }
}

TEST(LmiCertifier, MatchedPairIgnoresMismatchRatio) {
  auto c = oracle::table_cases().front();
  const ParamSet p = table1_params(c.inputs, oracle::table_tuning());
  EXPECT_EQ(p.mismatch_ratio, 0.0);
  c.inputs.theta_k = 0.01;
  try {
    table1_params(c.inputs, oracle::table_tuning());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::domain);
  }
}

TEST(LmiCertifier, Upsilon9Example) {
  TuningParams t = TuningParams::defaults();
  t.upsilon5 = 1.0;
  t.mu[4] = 0.25;
  const auto c = oracle::table_cases().front();
  EXPECT_DOUBLE_EQ(table1_params(c.inputs, t).ups9, 0.75);
}

TEST(LmiCertifier, RobustnessDiagonal) {
  const TuningParams t = oracle::table_tuning();
  const auto c = oracle::table_cases().back();
  const ParamSet p = table1_params(c.inputs, t);
  const auto d = lambda1_diagonal(p, t);
  EXPECT_DOUBLE_EQ(d[0], t.mu[3] - p.ups8_bar);
  EXPECT_DOUBLE_EQ(d[4], -p.ups12);
  const PairCertificate cert = check_theorem1(p, c.inputs.k3, t);
  bool all_nonpositive = true;
  for (double x : d) all_nonpositive = all_nonpositive && x <= 0.0;
  EXPECT_EQ(cert.robustness, all_nonpositive);
}

TEST(LmiCertifier, K3BoundaryFlip) {
  const TuningParams t = oracle::table_tuning();
  const auto c = oracle::table_cases().back();
  const ParamSet p = table1_params(c.inputs, t);
  ASSERT_GT(p.ups7_radicand, 0.0);
  const double bound = std::sqrt(p.ups7_radicand) / t.mu[0];
  EXPECT_TRUE(check_theorem1(p, 0.0, t).es_aurs);
  EXPECT_TRUE(check_theorem1(p, bound * (1 - 1e-12), t).es_aurs);
  EXPECT_FALSE(check_theorem1(p, bound * (1 + 1e-12), t).es_aurs);
  EXPECT_FALSE(check_theorem1(p, -1e-9, t).es_aurs);
}

TEST(LmiCertifier, NegativeRadicandReportedNotThrown) {
  const TuningParams t = oracle::table_tuning();
  const auto c = oracle::table_cases().front();
  const PairCertificate cert = check_theorem1(table1_params(c.inputs, t), 0.0, t);
  EXPECT_FALSE(cert.ups7);
  EXPECT_FALSE(cert.es_aurs);
}

TEST(LmiCertifier, LiteralLambda2HasPositiveDiagonal) {
  const TuningParams t = oracle::table_tuning();
  for (const auto& c : oracle::table_cases()) {
    const ParamSet p = table1_params(c.inputs, t);
    const Eigen::Matrix3d lit = lambda2_matrix(p, t, false);
    EXPECT_GT(lit.diagonal().maxCoeff(), 0.0);
    EXPECT_FALSE(check_theorem1(p, c.inputs.k3, t).sensitivity_literal);
  }
}

TEST(LmiCertifier, CertifyReferenceModes) {
  const auto modes = reference_modes();
  CertifyOptions o;
  const Certificate one = certify(modes, GlobalParams{}, TuningParams::defaults(), o);
  EXPECT_EQ(one.pairs.size(), 9u);
  EXPECT_EQ(one.total(), 27);
  for (const auto& p : one.pairs) EXPECT_FALSE(p.ups7) << p.alpha << "," << p.j;
  EXPECT_FALSE(one.feasible);

  o.normalization.time_scale = 100.0;
  const Certificate hundred = certify(modes, GlobalParams{}, TuningParams::defaults(), o);
  for (const auto& p : hundred.pairs) EXPECT_TRUE(p.ups7) << p.alpha << "," << p.j;
  bool all = true;
  for (const auto& p : hundred.pairs) all = all && p.pass();
  EXPECT_EQ(hundred.feasible, all);
}

TEST(LmiCertifier, SearchIsDeterministicAndKeepsFeasibleStart) {
  const auto modes = reference_modes();
  CertifyOptions o;
  o.normalization.time_scale = 100.0;
  o.check.lambda2_mode = Lambda2Mode::sign_flipped;
  const SearchResult a = search_tuning(modes, modes, GlobalParams{}, SearchBounds{}, 40, 3, o);
  const SearchResult b = search_tuning(modes, modes, GlobalParams{}, SearchBounds{}, 40, 3, o);
  EXPECT_EQ(a.best.satisfied(), b.best.satisfied());
  EXPECT_EQ(a.best.tuning.mu, b.best.tuning.mu);
  EXPECT_LE(a.evaluations, 40);
  if (a.feasible) {
    const SearchResult again =
        search_tuning(modes, modes, GlobalParams{}, SearchBounds{}, 1, 9, o, a.best.tuning);
    EXPECT_TRUE(again.feasible);
  }
}

TEST(LmiCertifier, SearchReportsForcedRadicandViolation) {
  const auto modes = reference_modes();
  SearchBounds b;
  b.mu_min = 50.0;  // mu_2 e^{-1} above every normalized speed
  CertifyOptions o;
  o.normalization.time_scale = 100.0;
  const SearchResult r = search_tuning(modes, modes, GlobalParams{}, b, 30, 1, o);
  EXPECT_FALSE(r.feasible);
  for (const auto& p : r.best.pairs) EXPECT_FALSE(p.es_aurs);
}

TEST(LmiCertifier, LyapunovEnergyExamples) {
  const std::vector<double> zero(101, 0.0), one(101, 1.0);
  const LyapunovEnergy z = lyapunov_energy(zero, zero);
  EXPECT_EQ(z.total, 0.0);
  const LyapunovEnergy e = lyapunov_energy(one, zero);
  EXPECT_NEAR(e.e1, (1.0 - std::exp(-1.0)) / 2.0, 1e-5);
  EXPECT_NEAR(e.e3, std::exp(-1.0) * (std::exp(1.0) - 1.0) / 2.0, 1e-14);
  EXPECT_EQ(e.e2, 0.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> a(51), b(51);
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng);
    EXPECT_GT(lyapunov_energy(a, b).total, 0.0);
  }
}
