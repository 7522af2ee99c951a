#include "rampguard/arz_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "rampguard/error.hpp"

namespace rampguard {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

void UncertaintySpec::validate() const {
  if (eta_rel_amp < 0.0 || vf_offset < 0.0 || qs_rel_amp < 0.0 || meas_rel_amp < 0.0)
    throw Error(ErrorCategory::config, "uncertainty amplitudes must be nonnegative");
  if (eta_freq_q < 0.0 || eta_freq_v < 0.0 || qs_freq < 0.0)
    throw Error(ErrorCategory::config, "uncertainty frequencies must be nonnegative");
  if (qs_rel_amp >= 1.0 || meas_rel_amp >= 1.0)
    throw Error(ErrorCategory::config, "relative amplitudes must be below one");
}

UncertaintySpec UncertaintySpec::none() {
  UncertaintySpec s;
  s.eta_rel_amp = 0.0;
  s.vf_offset = 0.0;
  s.qs_rel_amp = 0.0;
  s.meas_rel_amp = 0.0;
  return s;
}

UncertaintyField::UncertaintyField(const UncertaintySpec& spec) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> phase(0.0, two_pi);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  phase_q_ = phase(rng);
  phase_v_ = phase(rng);
  phase_qs_ = phase(rng);
  vf_offset_ = spec.vf_offset * unit(rng);
}

EtaSample UncertaintyField::sample(double q_star, double v_star, double x, double t,
                                   double length) const {
  if (spec_.eta_rel_amp == 0.0) return {};
  const double shape = std::sin(std::numbers::pi * x / length);
  EtaSample s;
  s.eta_q = spec_.eta_rel_amp * q_star * std::sin(two_pi * spec_.eta_freq_q * t + phase_q_) * shape;
  s.eta_v = spec_.eta_rel_amp * v_star * std::sin(two_pi * spec_.eta_freq_v * t + phase_v_) * shape;
  return s;
}

double UncertaintyField::mainline_flux(double base, double t) const {
  if (spec_.qs_rel_amp == 0.0) return base;
  return base * (1.0 + spec_.qs_rel_amp * std::sin(two_pi * spec_.qs_freq * t + phase_qs_));
}

EtaSample sample_uncertainty(const UncertaintySpec& spec, const ModeParams& mode, double x,
                             double t, double length) {
  return UncertaintyField(spec).sample(mode.q_star, mode.v_star, x, t, length);
}

TrafficState init_state(const GlobalParams& global, const ModeParams& mode, double ic_amp) {
  if (!(ic_amp >= 0.0 && ic_amp < 0.5))
    throw Error(ErrorCategory::config, "initial amplitude must lie in [0, 0.5)");
  TrafficState s;
  const int n = global.n_nodes();
  s.q.resize(n);
  s.v.resize(n);
  for (int i = 0; i < n; ++i) {
    const double bump = 1.0 + ic_amp * std::sin(two_pi * global.node(i) / global.length);
    s.q[i] = mode.q_star * bump;
    s.v[i] = mode.v_star * bump;
  }
  return s;
}

double stable_dt(const TrafficState& state, double v_free, const GlobalParams& global) {
  double speed = 0.0;
  for (std::size_t i = 0; i < state.q.size(); ++i) {
    const double rho = std::max(state.q[i] / state.v[i], 0.0);
    const double a = global.gamma * v_free * std::pow(rho / global.rho_max, global.gamma) - state.v[i];
    speed = std::max({speed, state.v[i], std::abs(a)});
  }
  return speed > 0.0 ? global.cfl * global.dx() / speed : std::numeric_limits<double>::infinity();
}

TrafficState step(const TrafficState& state, const ModeParams& plant_mode, double u_boundary,
                  double q_s, const UncertaintyField& field, double dt,
                  const GlobalParams& global, const StepOptions& options) {
  const double max_dt = stable_dt(state, plant_mode.v_free, global);
  if (dt > max_dt * (1.0 + 1e-12)) throw CflViolation(dt, max_dt);

  const std::size_t n = state.q.size();
  const double dx = global.dx();
  const auto& q = state.q;
  const auto& v = state.v;

  // gamma * p - v decides where velocity information comes from
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = q[i] / v[i];
    a[i] = global.gamma * pressure(rho, plant_mode.v_free, global) - v[i];
  }
  auto v_grad = [&](std::size_t i) {
    if (a[i] > 0.0) return i + 1 < n ? (v[i + 1] - v[i]) / dx : (v[i] - v[i - 1]) / dx;
    // inflowing velocity characteristic at the inlet has no boundary data
    return i > 0 ? (v[i] - v[i - 1]) / dx : 0.0;
  };

  TrafficState next;
  next.t = state.t + dt;
  next.q.resize(n);
  next.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) * dx;
    const double relax = (plant_mode.v_free - (a[i] + v[i]) / global.gamma - v[i]) / global.tau;
    const double vx = v_grad(i);
    const EtaSample eta =
        field.sample(plant_mode.q_star, plant_mode.v_star, x, state.t, global.length);
    if (i > 0) {
      const double qx = (q[i] - q[i - 1]) / dx;
      next.q[i] = q[i] + dt * (-v[i] * qx + q[i] * a[i] / v[i] * vx + q[i] * relax / v[i] +
                               eta.eta_q);
    }
    if (i + 1 < n) next.v[i] = v[i] + dt * (a[i] * vx + relax + eta.eta_v);
  }
  next.q[0] = q_s + u_boundary;
  next.v[n - 1] = next.q[n - 1] / plant_mode.rho_star;

  for (std::size_t i = 0; i < n; ++i) {
    if (!(next.v[i] > options.v_floor) || !(next.q[i] > 0.0) || !std::isfinite(next.q[i]))
      throw ModelBreakdown(next.t, static_cast<int>(i), next.v[i]);
  }
  return next;
}

double measure(const TrafficState& state, const UncertaintySpec& spec, std::mt19937_64& rng) {
  const double y = state.q.back();
  if (spec.meas_rel_amp == 0.0) return y;
  std::uniform_real_distribution<double> noise(-spec.meas_rel_amp, spec.meas_rel_amp);
  return y * (1.0 + noise(rng));
}

}  // namespace rampguard
