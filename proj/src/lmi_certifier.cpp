#include "rampguard/lmi_certifier.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "rampguard/error.hpp"
#include "rampguard/volterra.hpp"

namespace rampguard {

void Normalization::validate() const {
  if (!(time_scale > 0.0)) throw Error(ErrorCategory::config, "time scale must be positive");
}

NormalizedMode normalize(const DerivedConstants& d, const Normalization& n) {
  n.validate();
  NormalizedMode m;
  m.length = 1.0;
  m.v_star = d.v_star * n.time_scale / d.length;
  m.tau = d.tau / n.time_scale;
  m.p_star = d.p_star * n.time_scale / d.length;
  m.gamma = d.gamma;
  m.h = d.h;
  m.l = d.l;
  m.c = d.c;
  return m;
}

void TuningParams::validate() const {
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (!(mu[i] > 0.0))
      throw Error(ErrorCategory::config, fmt::format("mu_{} must be positive", i + 1));
  if (!(xi > 0.0)) throw Error(ErrorCategory::config, "xi must be positive");
  if (!(upsilon5 > 0.0) || !(upsilon6 > 0.0))
    throw Error(ErrorCategory::config, "upsilon5 and upsilon6 must be positive");
  if (!std::isfinite(upsilon16)) throw Error(ErrorCategory::config, "upsilon16 must be finite");
}

TuningParams TuningParams::defaults() {
  TuningParams t;
  t.mu.fill(0.01);
  t.mu[0] = 1.0;
  return t;
}

double upsilon7_radicand(const NormalizedMode& m, const TuningParams& tuning) {
  return upsilon7_radicand<double>(m.v_star, m.h, m.c, m.length / (m.tau * m.v_star), m.length,
                                   tuning.mu_at(1), tuning.mu_at(2), tuning.mu_at(3));
}

std::optional<double> upsilon7(const NormalizedMode& m, const TuningParams& tuning) {
  const double rad = upsilon7_radicand(m, tuning);
  if (!(rad >= 0.0)) return std::nullopt;
  return std::sqrt(rad);
}

ParamSet table1_params(const PairInputs& in, const TuningParams& tuning) {
  tuning.validate();
  return table1_params_t<double>(in, tuning);
}

PairInputs make_pair_inputs(const DerivedConstants& alpha, const DerivedConstants& j,
                            const GainSet& gains_j, const Normalization& normalization,
                            LambdaConvention convention) {
  PairInputs in;
  in.alpha = alpha.mode_id;
  in.j = j.mode_id;
  in.plant = normalize(alpha, normalization);
  in.k3 = gains_j.k3;
  in.lambda = outlet_lambda(alpha.l, alpha.c, gains_j.k3, convention);
  in.k1_norm_sq = gains_j.k1_norm_sq(normalization.time_scale);
  in.k2_norm_sq = gains_j.k2_norm_sq(normalization.time_scale);
  const ThetaSet theta = mismatch_params(alpha, j, gains_j.k3);
  in.theta_k = theta.theta_k;
  in.theta_c = theta.theta_c;
  return in;
}

std::array<double, 5> lambda1_diagonal(const ParamSet& p, const TuningParams& tuning) {
  return {tuning.mu_at(4) - p.ups8_bar, -p.ups9, -p.ups10, -p.ups11, -p.ups12};
}

Eigen::Matrix3d lambda2_matrix(const ParamSet& p, const TuningParams& tuning, bool flipped) {
  const double s = flipped ? -1.0 : 1.0;
  Eigen::Matrix3d m;
  m << p.ups8_bar - tuning.upsilon16, -1.0, -1.0,
       -1.0, s * p.ups17, 0.0,
       -1.0, 0.0, s * p.ups18;
  return m;
}

bool nsd_check(const Eigen::Matrix3d& m, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > std::max(tol, 0.0) + 1e-15 * scale)
    throw Error(ErrorCategory::domain, "matrix is not symmetric within tolerance");
  const Eigen::Matrix3d sym = 0.5 * (m + m.transpose());

  // tol*I - M must be positive semidefinite: every principal minor >= 0
  const Eigen::Matrix3d a = tol * Eigen::Matrix3d::Identity() - sym;
  const double s = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double e1 = 32 * DBL_EPSILON * s, e2 = e1 * s, e3 = e2 * s;
  const double m1[3] = {a(0, 0), a(1, 1), a(2, 2)};
  const double m2[3] = {a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
                        a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0),
                        a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)};
  const double m3 = a.determinant();
  bool clear_pass = m3 > e3;
  bool clear_fail = m3 < -e3;
  for (int i = 0; i < 3; ++i) {
    clear_pass = clear_pass && m1[i] > e1 && m2[i] > e2;
    clear_fail = clear_fail || m1[i] < -e1 || m2[i] < -e2;
  }

  if (clear_pass || clear_fail) return clear_pass;

  // near the boundary the minors lose their sign; decide on the spectrum
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff() <= tol;
}

PairCertificate check_theorem1(const ParamSet& params, double k3, const TuningParams& tuning,
                               const CheckOptions& options) {
  PairCertificate c;
  c.k3 = k3;
  c.params = params;
  c.ups7_radicand = params.ups7_radicand;
  if (params.ups7_radicand >= 0.0) c.ups7 = std::sqrt(params.ups7_radicand);
  const double mk = tuning.mu_at(1) * k3;
  c.es_aurs = c.ups7.has_value() && mk >= 0.0 && mk <= *c.ups7;

  c.lambda1 = lambda1_diagonal(params, tuning);
  c.robustness = true;
  for (std::size_t i = 0; i < c.lambda1.size(); ++i) {
    if (!(c.lambda1[i] <= 0.0)) {
      c.robustness = false;
      c.robustness_offending = static_cast<int>(i);
      break;
    }
  }

  c.lambda2 = lambda2_matrix(params, tuning, false);
  c.lambda2_flipped = lambda2_matrix(params, tuning, true);
  c.sensitivity_literal = nsd_check(c.lambda2, options.tol_psd);
  c.sensitivity_flipped = nsd_check(c.lambda2_flipped, options.tol_psd);
  switch (options.lambda2_mode) {
    case Lambda2Mode::literal: c.sensitivity = c.sensitivity_literal; break;
    case Lambda2Mode::sign_flipped: c.sensitivity = c.sensitivity_flipped; break;
    case Lambda2Mode::elementwise:
      c.sensitivity = (c.lambda2.array() <= options.tol_psd).all();
      break;
  }
  return c;
}

int Certificate::satisfied() const {
  int n = 0;
  for (const auto& p : pairs) n += p.satisfied();
  return n;
}

namespace {

double policy_k3(const DerivedConstants& d, const TuningParams& tuning,
                 const CertifyOptions& options) {
  switch (options.k3_policy) {
    case K3Policy::zero: return 0.0;
    case K3Policy::deadbeat: return deadbeat_k3(d);
    case K3Policy::half_bound: {
      const auto bound = upsilon7(normalize(d, options.normalization), tuning);
      return bound ? *bound / (2.0 * tuning.mu_at(1)) : 0.0;
    }
  }
  return 0.0;
}

}  // namespace

Certificate certify(const std::vector<ModeParams>& alpha_set,
                    const std::vector<ModeParams>& j_set, const GlobalParams& global,
                    const TuningParams& tuning, const CertifyOptions& options) {
  tuning.validate();
  options.normalization.validate();
  Certificate cert;
  cert.tuning = tuning;
  cert.normalization = options.normalization;
  cert.lambda2_mode = options.check.lambda2_mode;

  std::vector<DerivedConstants> detectors;
  std::vector<GainSet> gains;
  for (const auto& m : j_set) {
    const DerivedConstants d = derive_mode_constants(m, global);
    const double k3 = policy_k3(d, tuning, options);
    detectors.push_back(d);
    gains.push_back(compute_gains(d, global, k3, options.gain_form, options.lambda));
    cert.k3.emplace_back(m.id, k3);
  }
  cert.feasible = cert.feasible_literal = cert.feasible_sign_flipped = true;
  for (const auto& am : alpha_set) {
    const DerivedConstants alpha = derive_mode_constants(am, global);
    for (std::size_t j = 0; j < detectors.size(); ++j) {
      const PairInputs in =
          make_pair_inputs(alpha, detectors[j], gains[j], options.normalization, options.lambda);
      PairCertificate pc = check_theorem1(table1_params(in, tuning), gains[j].k3, tuning,
                                          options.check);
      pc.alpha = alpha.mode_id;
      pc.j = detectors[j].mode_id;
      cert.feasible = cert.feasible && pc.pass();
      cert.feasible_literal =
          cert.feasible_literal && pc.es_aurs && pc.robustness && pc.sensitivity_literal;
      cert.feasible_sign_flipped =
          cert.feasible_sign_flipped && pc.es_aurs && pc.robustness && pc.sensitivity_flipped;
      cert.pairs.push_back(std::move(pc));
    }
  }
  return cert;
}

Certificate certify(const std::vector<ModeParams>& modes, const GlobalParams& global,
                    const TuningParams& tuning, const CertifyOptions& options) {
  return certify(modes, modes, global, tuning, options);
}

void SearchBounds::validate() const {
  auto ok = [](double lo, double hi) { return lo > 0.0 && hi >= lo && std::isfinite(hi); };
  if (!ok(mu_min, mu_max) || !ok(ups5_min, ups5_max) || !ok(ups6_min, ups6_max) ||
      !ok(ups16_min, ups16_max))
    throw Error(ErrorCategory::config, "search bounds must be positive and ordered");
}

namespace {

constexpr int n_coords = 19;

struct Score {
  int satisfied = 0;
  double violation = 0.0;

  bool better_than(const Score& o) const {
    if (satisfied != o.satisfied) return satisfied > o.satisfied;
    return violation < o.violation;
  }
};

double eigen_max(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

Score score(const Certificate& c, const CheckOptions& check) {
  Score s;
  s.satisfied = c.satisfied();
  for (const auto& p : c.pairs) {
    if (!p.ups7) {
      s.violation += 1.0 - p.ups7_radicand;
    } else {
      s.violation += std::max(0.0, p.k3 - *p.ups7);
    }
    for (double d : p.lambda1) s.violation += std::max(0.0, d);
    const Eigen::Matrix3d& m =
        check.lambda2_mode == Lambda2Mode::sign_flipped ? p.lambda2_flipped : p.lambda2;
    s.violation += std::max(0.0, eigen_max(m) - check.tol_psd);
  }
  return s;
}

std::array<double, n_coords> to_coords(const TuningParams& t) {
  std::array<double, n_coords> x{};
  for (int i = 0; i < 16; ++i) x[i] = t.mu[i];
  x[16] = t.upsilon5;
  x[17] = t.upsilon6;
  x[18] = t.upsilon16;
  return x;
}

TuningParams from_coords(const std::array<double, n_coords>& x, double xi) {
  TuningParams t;
  for (int i = 0; i < 16; ++i) t.mu[i] = x[i];
  t.upsilon5 = x[16];
  t.upsilon6 = x[17];
  t.upsilon16 = x[18];
  t.xi = xi;
  return t;
}

std::pair<double, double> coord_bounds(const SearchBounds& b, int k) {
  if (k < 16) return {b.mu_min, b.mu_max};
  if (k == 16) return {b.ups5_min, b.ups5_max};
  if (k == 17) return {b.ups6_min, b.ups6_max};
  return {b.ups16_min, b.ups16_max};
}

}  // namespace

SearchResult search_tuning(const std::vector<ModeParams>& alpha_set,
                           const std::vector<ModeParams>& j_set, const GlobalParams& global,
                           const SearchBounds& bounds, int budget, std::uint64_t seed,
                           const CertifyOptions& options, std::optional<TuningParams> start) {
  bounds.validate();
  if (budget < 1) throw Error(ErrorCategory::config, "search budget must be at least 1");
  const double xi = std::exp(1.0) - 1.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SearchResult result;
  Score best_score{-1, std::numeric_limits<double>::infinity()};
  std::array<double, n_coords> best_x{};

  auto evaluate = [&](const std::array<double, n_coords>& x) {
    const TuningParams t = from_coords(x, start ? start->xi : xi);
    Certificate c = certify(alpha_set, j_set, global, t, options);
    const Score s = score(c, options.check);
    ++result.evaluations;
    if (s.better_than(best_score)) {
      best_score = s;
      best_x = x;
      result.best = std::move(c);
    }
  };

  if (start) evaluate(to_coords(*start));
  const int random_budget = std::max(0, budget / 2 - result.evaluations);
  for (int i = 0; i < random_budget; ++i) {
    std::array<double, n_coords> x{};
    for (int k = 0; k < n_coords; ++k) {
      const auto [lo, hi] = coord_bounds(bounds, k);
      x[k] = lo * std::pow(hi / lo, unit(rng));
    }
    evaluate(x);
  }

  // multiplicative coordinate refinement around the incumbent
  double factor = 4.0;
  while (result.evaluations < budget && factor > 1.01) {
    bool improved = false;
    for (int k = 0; k < n_coords && result.evaluations < budget; ++k) {
      for (double f : {factor, 1.0 / factor}) {
        if (result.evaluations >= budget) break;
        std::array<double, n_coords> x = best_x;
        const auto [lo, hi] = coord_bounds(bounds, k);
        x[k] = std::clamp(x[k] * f, lo, hi);
        if (x[k] == best_x[k]) continue;
        const Score before = best_score;
        evaluate(x);
        if (best_score.better_than(before)) improved = true;
      }
    }
    if (!improved) factor = std::sqrt(factor);
  }
  result.feasible = result.best.feasible;
  return result;
}

LyapunovEnergy lyapunov_energy(std::span<const double> phi, std::span<const double> psi,
                               double length_hat) {
  if (phi.size() != psi.size() || phi.size() < 2)
    throw Error(ErrorCategory::domain, "energy grids must match and hold at least two nodes");
  const double dx = length_hat / static_cast<double>(phi.size() - 1);
  std::vector<double> f1(phi.size()), f2(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double x = static_cast<double>(i) * dx;
    f1[i] = std::exp(-x) * phi[i] * phi[i] / 2.0;
    f2[i] = std::exp(x) * psi[i] * psi[i] / 2.0;
  }
  LyapunovEnergy e;
  e.e1 = trapezoid(f1, dx);
  e.e2 = trapezoid(f2, dx);
  const double xi = std::exp(length_hat) - 1.0;
  e.e3 = std::exp(-length_hat) * xi / 2.0 * phi.back() * phi.back();
  e.total = e.e1 + e.e2 + e.e3;
  return e;
}

}  // namespace rampguard
