#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rampguard/detector_bank.hpp"
#include "rampguard/error.hpp"
#include "rampguard/traffic_core.hpp"
#include "rampguard/tuning.hpp"

namespace rampguard {

/// Everything the parameter table needs for one (plant alpha, detector j) pair,
/// already in normalized units.
struct PairInputs {
  int alpha = 0;
  int j = 0;
  NormalizedMode plant;
  double k3 = 0.0;           // detector j outlet gain
  double lambda = 0.0;       // l^alpha - c^alpha k3^j
  double k1_norm_sq = 0.0;   // ||k1^j||^2 on x_hat in [0, 1]
  double k2_norm_sq = 0.0;
  double theta_k = 0.0;
  double theta_c = 0.0;
};

template <class Real>
struct ParamSetT {
  Real ups7_radicand{};
  Real ups8{};
  Real ups8_bar{};
  Real ups9{};
  Real ups10{};
  Real ups11{};
  Real ups12{};
  Real ups13{};
  Real ups14{};
  Real ups15{};
  Real ups17{};
  Real ups18{};
  Real ups_theta{};
  Real mismatch_ratio{};  // theta_k^2 / theta_c^2
};

using ParamSet = ParamSetT<double>;

/// Evaluates the parameter table in the arithmetic of `Real`.
template <class Real>
ParamSetT<Real> table1_params_t(const PairInputs& in, const TuningParams& tuning);

ParamSet table1_params(const PairInputs& in, const TuningParams& tuning);

PairInputs make_pair_inputs(const DerivedConstants& alpha, const DerivedConstants& j,
                            const GainSet& gains_j, const Normalization& normalization,
                            LambdaConvention convention = LambdaConvention::consistent);

enum class Lambda2Mode { literal, sign_flipped, elementwise };

struct CheckOptions {
  double tol_psd = 1e-9;
  Lambda2Mode lambda2_mode = Lambda2Mode::literal;
};

struct PairCertificate {
  int alpha = 0;
  int j = 0;
  double k3 = 0.0;
  double ups7_radicand = 0.0;
  std::optional<double> ups7;
  bool es_aurs = false;
  std::array<double, 5> lambda1{};
  bool robustness = false;
  int robustness_offending = -1;  // first positive diagonal entry
  Eigen::Matrix3d lambda2 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d lambda2_flipped = Eigen::Matrix3d::Zero();
  bool sensitivity = false;          // under the configured Lambda2Mode
  bool sensitivity_literal = false;  // always reported
  bool sensitivity_flipped = false;  // always reported
  ParamSet params;

  int satisfied() const { return int(es_aurs) + int(robustness) + int(sensitivity); }
  bool pass() const { return es_aurs && robustness && sensitivity; }
};

Eigen::Matrix3d lambda2_matrix(const ParamSet& p, const TuningParams& tuning, bool flipped);
std::array<double, 5> lambda1_diagonal(const ParamSet& p, const TuningParams& tuning);

PairCertificate check_theorem1(const ParamSet& params, double k3, const TuningParams& tuning,
                               const CheckOptions& options = {});

/// True iff every eigenvalue of the symmetric matrix is <= tol.
bool nsd_check(const Eigen::Matrix3d& m, double tol = 1e-9);

enum class K3Policy { half_bound, zero, deadbeat };

struct CertifyOptions {
  Normalization normalization;
  CheckOptions check;
  GainForm gain_form = GainForm::decoupling;
  LambdaConvention lambda = LambdaConvention::consistent;
  K3Policy k3_policy = K3Policy::half_bound;
};

struct Certificate {
  TuningParams tuning;
  Normalization normalization;
  Lambda2Mode lambda2_mode = Lambda2Mode::literal;
  std::vector<std::pair<int, double>> k3;  // (detector mode, k3)
  std::vector<PairCertificate> pairs;
  bool feasible = false;
  bool feasible_literal = false;
  bool feasible_sign_flipped = false;

  int satisfied() const;
  int total() const { return 3 * static_cast<int>(pairs.size()); }
};

/// Certify every (alpha, j) combination of the given modes.
Certificate certify(const std::vector<ModeParams>& modes, const GlobalParams& global,
                    const TuningParams& tuning, const CertifyOptions& options = {});

Certificate certify(const std::vector<ModeParams>& alpha_set,
                    const std::vector<ModeParams>& j_set, const GlobalParams& global,
                    const TuningParams& tuning, const CertifyOptions& options = {});

struct SearchBounds {
  double mu_min = 1e-3;
  double mu_max = 1e2;
  double ups5_min = 1e-3;
  double ups5_max = 1e2;
  double ups6_min = 1e-3;
  double ups6_max = 1e2;
  double ups16_min = 1e-3;
  double ups16_max = 1e2;

  void validate() const;
};

struct SearchResult {
  Certificate best;
  int evaluations = 0;
  bool feasible = false;
};

/// Randomized sampling followed by multiplicative coordinate refinement,
/// maximizing the number of satisfied conditions. `start` is evaluated first.
SearchResult search_tuning(const std::vector<ModeParams>& alpha_set,
                           const std::vector<ModeParams>& j_set, const GlobalParams& global,
                           const SearchBounds& bounds, int budget, std::uint64_t seed,
                           const CertifyOptions& options = {},
                           std::optional<TuningParams> start = std::nullopt);

struct LyapunovEnergy {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double total = 0.0;
};

/// Energies of (phi, psi) sampled on a uniform mesh of [0, length_hat].
LyapunovEnergy lyapunov_energy(std::span<const double> phi, std::span<const double> psi,
                               double length_hat = 1.0);

// ---------------------------------------------------------------------------

template <class Real>
ParamSetT<Real> table1_params_t(const PairInputs& in, const TuningParams& tuning) {
  using std::exp;
  auto mu = [&](int i) { return Real(tuning.mu_at(i)); };
  const Real len(in.plant.length);
  const Real v(in.plant.v_star);
  const Real h(in.plant.h);
  const Real c(in.plant.c);
  const Real tgp(in.plant.tau_gp());
  const Real lambda(in.lambda);
  const Real xi(tuning.xi);
  const Real ups5(tuning.upsilon5);
  const Real ups6(tuning.upsilon6);
  const Real transit = len / (Real(in.plant.tau) * v);

  ParamSetT<Real> p;
  p.ups7_radicand = upsilon7_radicand<Real>(v, h, c, transit, len, mu(1), mu(2), mu(3));
  p.ups8 = v / xi - mu(3) * v * h * lambda * lambda / (exp(-2 * len) * xi) -
           mu(2) / (exp(len) * xi);
  p.ups8_bar = p.ups8 * xi / (2 * exp(len));
  p.ups13 = mu(7) + len * len * (mu(7) * h * h + mu(5)) / (tgp * tgp);
  p.ups14 = mu(8) + len * len * (mu(8) * h * h + mu(13)) / (tgp * tgp);
  p.mismatch_ratio = Real(0);
  if (in.theta_c != 0.0) {
    const Real tk(in.theta_k);
    const Real tc(in.theta_c);
    p.mismatch_ratio = tk * tk / (tc * tc);
  } else if (in.theta_k != 0.0) {
    throw Error(ErrorCategory::domain, "theta_k / theta_c undefined: theta_c = 0, theta_k != 0");
  }
  p.ups15 = p.ups14 * Real(in.k1_norm_sq) + mu(13) * Real(in.k2_norm_sq) +
            mu(3) * v * h * exp(len) * p.mismatch_ratio + mu(14);
  auto larger = [](const Real& a, const Real& b) { return a < b ? b : a; };
  Real theta = larger(Real(mu(10) * v), Real(mu(11) * v));
  theta = larger(theta, mu(13));
  theta = larger(theta, mu(14));
  theta = larger(theta, p.ups14);
  theta = larger(theta, p.ups15);
  p.ups_theta = theta;
  p.ups9 = ups5 - mu(5);
  p.ups10 = ups5 - p.ups13;
  p.ups11 = ups5 - mu(6) * xi * xi / 2;
  p.ups12 = ups5 - mu(4) - p.ups_theta;
  p.ups17 = mu(12) * v + ups6 + mu(15);
  p.ups18 = p.ups_theta + ups6 + mu(16) + 1;
  return p;
}

}  // namespace rampguard
