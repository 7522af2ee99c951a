#include "rampguard/detector_bank.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rampguard/error.hpp"
#include "rampguard/volterra.hpp"

namespace rampguard {

KernelValues kernels(const DerivedConstants& mode, double x, double z) {
  if (x > z)
    throw Error(ErrorCategory::domain,
                fmt::format("kernel evaluated below the diagonal: x = {} > z = {}", x, z));
  const double a = 1.0 / mode.tau_gp;
  return {mode.h * a * std::exp(mode.h * a * (x - z)), -a * std::exp(-a * (x + mode.h * z))};
}

KernelValues inverse_kernels(const DerivedConstants& mode, double x, double z) {
  if (x > z)
    throw Error(ErrorCategory::domain,
                fmt::format("kernel evaluated below the diagonal: x = {} > z = {}", x, z));
  const double a = 1.0 / mode.tau_gp;
  return {-mode.h * a, a * std::exp(-x / (mode.tau * mode.v_star))};
}

namespace {

double norm_sq(const std::vector<double>& g, double time_scale) {
  if (g.size() < 2) return 0.0;
  std::vector<double> sq(g.size());
  std::transform(g.begin(), g.end(), sq.begin(), [&](double v) {
    const double s = v * time_scale;
    return s * s;
  });
  return trapezoid(sq, 1.0 / static_cast<double>(g.size() - 1));
}

}  // namespace

double GainSet::k1_norm_sq(double time_scale) const { return norm_sq(k1, time_scale); }
double GainSet::k2_norm_sq(double time_scale) const { return norm_sq(k2, time_scale); }

double outlet_lambda(double l, double c, double k3, LambdaConvention convention) {
  return convention == LambdaConvention::consistent ? l - c * k3 : l - k3;
}

GainSet compute_gains(const DerivedConstants& mode, const GlobalParams& global, double k3,
                      GainForm form, LambdaConvention convention) {
  const int n = global.n_nodes();
  const double scale = mode.v_star / mode.c;
  GainSet g;
  g.form = form;
  g.k3 = k3;
  g.lambda = outlet_lambda(mode.l, mode.c, k3, convention);
  g.k1.resize(n);
  g.k2.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = global.node(i);
    if (form == GainForm::published) {
      const KernelValues k = kernels(mode, x, global.length);
      g.k1[i] = scale * k.r;
      g.k2[i] = scale * k.s;
    } else {
      g.k1[i] = scale * kernels(mode, global.length, global.length).r;
      g.k2[i] = scale * kernels(mode, x, x).s;
    }
  }
  return g;
}

double select_k3(const DerivedConstants& mode, const TuningParams& tuning,
                 const Normalization& normalization) {
  const auto bound = upsilon7(normalize(mode, normalization), tuning);
  if (!bound)
    throw Error(ErrorCategory::config,
                fmt::format("no feasible k3 for mode {} under this tuning", mode.mode_id));
  return *bound / (2.0 * tuning.mu_at(1));
}

double deadbeat_k3(const DerivedConstants& mode) { return mode.l / mode.c; }

DetectorState DetectorState::steady(int j, const GlobalParams& global) {
  DetectorState d;
  d.j = j;
  d.w_hat.assign(global.n_nodes(), 0.0);
  d.v_hat.assign(global.n_nodes(), 0.0);
  return d;
}

double detector_stable_dt(const DerivedConstants& mode, const GlobalParams& global) {
  return global.cfl * global.dx() / std::max(mode.w_speed(), mode.v_speed());
}

double detector_output(const DetectorState& det, double y, const DerivedConstants& mode) {
  return y - mode.q_star - mode.c * det.w_hat.back();
}

DetectorStepResult detector_step(const DetectorState& det, double u_sigma, double y, double q_s,
                                 const GainSet& gains, const DerivedConstants& mode, double dt,
                                 const GlobalParams& global) {
  const double max_dt = detector_stable_dt(mode, global);
  if (dt > max_dt * (1.0 + 1e-12)) throw CflViolation(dt, max_dt);
  const std::size_t n = det.w_hat.size();
  if (n != static_cast<std::size_t>(global.n_nodes()) || det.v_hat.size() != n ||
      gains.k1.size() != n || gains.k2.size() != n)
    throw Error(ErrorCategory::config, "detector grids do not match the mesh");

  const double zeta = detector_output(det, y, mode);
  const double dx = global.dx();
  const double cw = mode.w_speed() * dt / dx;
  const double cv = mode.v_speed() * dt / dx;
  const auto& w = det.w_hat;
  const auto& v = det.v_hat;

  DetectorStepResult out;
  out.zeta = zeta;
  out.state.j = det.j;
  out.state.zeta = zeta;
  auto& wn = out.state.w_hat;
  auto& vn = out.state.v_hat;
  wn.resize(n);
  vn.resize(n);
  for (std::size_t i = 1; i < n; ++i) wn[i] = w[i] - cw * (w[i] - w[i - 1]) + dt * gains.k1[i] * zeta;
  for (std::size_t i = 0; i + 1 < n; ++i)
    vn[i] = v[i] + cv * (v[i + 1] - v[i]) +
            dt * (mode.beta(static_cast<double>(i) * dx) * w[i] + gains.k2[i] * zeta);
  vn[n - 1] = mode.l * wn[n - 1] + gains.k3 * zeta;
  wn[0] = -mode.h * vn[0] + q_s + u_sigma - mode.q_star;
  return out;
}

double residual(std::span<const double> zetas) {
  if (zetas.empty()) throw Error(ErrorCategory::config, "empty detector bank");
  double r = std::abs(zetas.front());
  for (double z : zetas) r = std::min(r, std::abs(z));
  return r;
}

Calibration calibrate_threshold(std::span<const double> nominal_residuals, double target_far) {
  if (nominal_residuals.size() < 100)
    throw Error(ErrorCategory::calibration,
                fmt::format("calibration needs at least 100 samples, got {}",
                            nominal_residuals.size()));
  if (!(target_far > 0.0 && target_far < 1.0))
    throw Error(ErrorCategory::calibration, "target false-alarm rate must lie in (0, 1)");
  std::vector<double> sorted(nominal_residuals.begin(), nominal_residuals.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - target_far) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  Calibration c;
  c.threshold = sorted[rank - 1];
  c.samples = sorted.size();
  const auto above = std::count_if(sorted.begin(), sorted.end(),
                                   [&](double r) { return r > c.threshold; });
  c.exceedance_rate = static_cast<double>(above) / n;
  return c;
}

std::vector<AlarmEvent> detect(std::span<const double> t, std::span<const double> r,
                               double threshold, int persistence,
                               std::optional<double> attack_onset) {
  if (persistence < 1) throw Error(ErrorCategory::config, "persistence must be at least 1");
  if (t.size() != r.size()) throw Error(ErrorCategory::config, "time and residual lengths differ");
  std::vector<AlarmEvent> events;
  int run = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    run = r[k] > threshold ? run + 1 : 0;
    if (run == persistence) {
      AlarmEvent e;
      e.t = t[k];
      e.sample = k;
      if (attack_onset) e.latency = t[k] - *attack_onset;
      events.push_back(e);
    }
  }
  return events;
}

FieldPair backstep_transform(std::span<const double> omega, std::span<const double> vartheta,
                             const DerivedConstants& mode, const GlobalParams& global) {
  const double dx = global.dx();
  FieldPair out;
  out.first = volterra_subtract(omega, omega,
                                [&](double x, double z) { return kernels(mode, x, z).r; }, dx);
  out.second = volterra_subtract(vartheta, omega,
                                 [&](double x, double z) { return kernels(mode, x, z).s; }, dx);
  return out;
}

FieldPair inverse_backstep_transform(std::span<const double> phi, std::span<const double> psi,
                                     const DerivedConstants& mode, const GlobalParams& global) {
  const double dx = global.dx();
  FieldPair out;
  out.first = volterra_subtract(
      phi, phi, [&](double x, double z) { return inverse_kernels(mode, x, z).r; }, dx);
  out.second = volterra_subtract(
      psi, phi, [&](double x, double z) { return inverse_kernels(mode, x, z).s; }, dx);
  return out;
}

}  // namespace rampguard
