#include "rampguard/traffic_core.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rampguard/error.hpp"

namespace rampguard {

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::unit: return "unit";
    case ErrorCategory::cfl: return "cfl";
    case ErrorCategory::breakdown: return "breakdown";
    case ErrorCategory::calibration: return "calibration";
    case ErrorCategory::io: return "io";
    case ErrorCategory::usage: return "usage";
  }
  return "unknown";
}

CflViolation::CflViolation(double requested_dt, double max_dt)
    : Error(ErrorCategory::cfl,
            fmt::format("time step {:.6g} s exceeds the stability bound {:.6g} s", requested_dt,
                        max_dt)),
      requested_dt_(requested_dt),
      max_dt_(max_dt) {}

ModelBreakdown::ModelBreakdown(double t, int cell, double velocity)
    : Error(ErrorCategory::breakdown,
            fmt::format("model breakdown at t = {:.3f} s in cell {} (v = {:.6g} m/s)", t, cell,
                        velocity)),
      t_(t),
      cell_(cell) {}

void GlobalParams::validate() const {
  if (!(length > 0.0) || !(rho_max > 0.0) || !(tau > 0.0) || !(gamma > 0.0))
    throw Error(ErrorCategory::config, "length, rho_max, tau and gamma must be positive");
  if (n_cells < 8) throw Error(ErrorCategory::config, "n_cells must be at least 8");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw Error(ErrorCategory::config, "cfl must lie in (0, 1]");
}

void ModeParams::validate(const GlobalParams& global) const {
  if (id < 1) throw Error(ErrorCategory::config, fmt::format("mode id {} is not positive", id));
  if (!(v_star > 0.0) || !(v_free > v_star))
    throw Error(ErrorCategory::config,
                fmt::format("mode {}: need v_free > v_star > 0", id));
  if (!(rho_star > 0.0) || !(rho_star < global.rho_max))
    throw Error(ErrorCategory::config,
                fmt::format("mode {}: rho_star must lie in (0, rho_max)", id));
  if (std::abs(q_star - rho_star * v_star) > 1e-9 * std::abs(q_star))
    throw Error(ErrorCategory::config,
                fmt::format("mode {}: q_star {} differs from rho_star * v_star = {}", id, q_star,
                            rho_star * v_star));
}

double DerivedConstants::beta(double x) const { return -std::exp(-x / (tau * v_star)) / tau; }

double ThetaSet::theta_beta(double x) const {
  if (v_plant == v_detector) return 0.0;
  return -std::exp(-x / (tau * v_plant)) / tau + std::exp(-x / (tau * v_detector)) / tau;
}

double pressure(double density, double v_free, const GlobalParams& global) {
  if (density < 0.0)
    throw Error(ErrorCategory::domain, fmt::format("negative density {}", density));
  return v_free * std::pow(density / global.rho_max, global.gamma);
}

double pressure(double density, const ModeParams& mode, const GlobalParams& global) {
  return pressure(density, mode.v_free, global);
}

double equilibrium_velocity_residual(const ModeParams& mode, const GlobalParams& global) {
  return mode.v_free - pressure(mode.rho_star, mode, global) - mode.v_star;
}

ModeParams apply_equilibrium_policy(const ModeParams& mode, const GlobalParams& global,
                                    EquilibriumPolicy policy) {
  if (policy == EquilibriumPolicy::table) return mode;
  ModeParams out = mode;
  out.v_star = mode.v_free - pressure(mode.rho_star, mode, global);
  out.q_star = mode.rho_star * out.v_star;
  return out;
}

DerivedConstants derive_mode_constants(const ModeParams& mode, const GlobalParams& global) {
  global.validate();
  mode.validate(global);
  DerivedConstants d;
  d.mode_id = mode.id;
  d.length = global.length;
  d.tau = global.tau;
  d.gamma = global.gamma;
  d.v_star = mode.v_star;
  d.q_star = mode.q_star;
  d.p_star = pressure(mode.rho_star, mode, global);
  if (global.gamma * d.p_star <= mode.v_star)
    throw Error(ErrorCategory::config,
                fmt::format("mode {} outside supported regime: gamma * p* <= v*", mode.id));
  d.h = (global.gamma * d.p_star - mode.v_star) / mode.v_star;
  d.l = std::exp(-global.length / (global.tau * mode.v_star));
  d.c = global.gamma * d.p_star / mode.v_star * d.l;
  d.tau_gp = global.tau * global.gamma * d.p_star;
  return d;
}

ModeModel make_mode_model(const ModeParams& mode, const GlobalParams& global) {
  return {mode, derive_mode_constants(mode, global)};
}

std::vector<ModeModel> make_mode_models(const std::vector<ModeParams>& modes,
                                        const GlobalParams& global) {
  std::vector<ModeModel> out;
  out.reserve(modes.size());
  for (const auto& m : modes) out.push_back(make_mode_model(m, global));
  return out;
}

WV to_wv(double q_dev, double v_dev, double x, const DerivedConstants& d) {
  const double gp = d.gamma * d.p_star;
  WV out;
  out.w = std::exp(x / (d.tau * d.v_star)) * (q_dev - d.q_star * d.h / gp * v_dev);
  out.v = d.q_star / gp * v_dev;
  return out;
}

FluxVelocity from_wv(double w, double v, double x, const DerivedConstants& d) {
  const double gp = d.gamma * d.p_star;
  FluxVelocity out;
  out.v = gp / d.q_star * v;
  out.q = w * std::exp(-x / (d.tau * d.v_star)) + d.h * v;
  return out;
}

ThetaSet mismatch_params(const DerivedConstants& plant, const DerivedConstants& detector,
                         double k3) {
  ThetaSet t;
  t.theta_v = detector.v_star - plant.v_star;
  t.theta_hv = plant.v_star * plant.h - detector.v_star * detector.h;
  t.theta_h = detector.h - plant.h;
  t.theta_q = plant.q_star - detector.q_star;
  t.theta_l = plant.l - detector.l;
  t.theta_c = plant.c - detector.c;
  t.theta_k = t.theta_l - k3 * t.theta_c;
  t.tau = plant.tau;
  t.v_plant = plant.v_star;
  t.v_detector = detector.v_star;
  return t;
}

const ModeParams& find_mode(const std::vector<ModeParams>& modes, int id) {
  for (const auto& m : modes)
    if (m.id == id) return m;
  throw Error(ErrorCategory::config, fmt::format("unknown mode id {}", id));
}

const ModeModel& find_mode(const std::vector<ModeModel>& modes, int id) {
  for (const auto& m : modes)
    if (m.params.id == id) return m;
  throw Error(ErrorCategory::config, fmt::format("unknown mode id {}", id));
}

std::vector<ModeParams> reference_modes() {
  // free-flow speed, desired density and steady state per weather mode
  return {
      {1, 25.0, 0.12, 6.0, 0.72, 1.8},
      {2, 30.0, 0.12, 7.0, 0.84, 2.4},
      {3, 35.0, 0.12, 8.0, 0.96, 3.5},
  };
}

}  // namespace rampguard
