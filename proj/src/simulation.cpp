#include "rampguard/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "rampguard/error.hpp"
#include "rampguard/tuning_io.hpp"

namespace rampguard {

namespace {

// measurement noise uses its own stream so that it does not shift the
// uncertainty realization
std::mt19937_64 measurement_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x6d656173u};
  return std::mt19937_64(seq);
}

void record_state(StateSeries& out, const TrafficState& s) {
  out.t.push_back(s.t);
  out.q.push_back(s.q);
  out.v.push_back(s.v);
  std::vector<double> rho(s.q.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = s.density(i);
  out.rho.push_back(std::move(rho));
}

}  // namespace

std::vector<double> resolve_k3(const Scenario& s) {
  const auto modes = s.effective_modes();
  std::vector<double> out;
  std::optional<CertificateFile> cert;
  if (s.detectors.k3_source == K3Source::certificate)
    cert = read_certificate(s.detectors.certificate);
  for (const auto& m : modes) {
    const DerivedConstants d = derive_mode_constants(m, s.global);
    switch (s.detectors.k3_source) {
      case K3Source::zero: out.push_back(0.0); break;
      case K3Source::deadbeat: out.push_back(deadbeat_k3(d)); break;
      case K3Source::fixed: out.push_back(s.detectors.k3.at(m.id)); break;
      case K3Source::certificate: out.push_back(certified_k3(*cert, m.id)); break;
    }
  }
  return out;
}

double resolve_threshold(const Scenario& s) {
  if (s.threshold.fixed) return *s.threshold.fixed;
  return monte_carlo_calibrate(s, s.threshold.calibration_runs, s.threshold.target_far)
      .calibration.threshold;
}

RunArtifacts run_scenario(const Scenario& s, const RunOptions& options) {
  s.validate();
  const std::vector<ModeParams> modes = s.effective_modes();
  const std::vector<ModeModel> models = make_mode_models(modes, s.global);
  const std::vector<double> k3 = resolve_k3(s);
  const double threshold = options.threshold ? *options.threshold : resolve_threshold(s);

  std::vector<GainSet> gains;
  std::vector<DetectorState> bank;
  double dt_detectors = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < models.size(); ++j) {
    const auto& d = models[j].derived;
    gains.push_back(compute_gains(d, s.global, k3[j], s.detectors.gain_form, s.detectors.lambda));
    bank.push_back(DetectorState::steady(d.mode_id, s.global));
    dt_detectors = std::min(dt_detectors, detector_stable_dt(d, s.global));
  }

  UncertaintySpec uspec = s.uncertainty;
  uspec.seed = s.seed;
  const UncertaintyField field(uspec);
  std::mt19937_64 noise = measurement_rng(s.seed);

  const int initial_mode = s.true_mode_at(0.0);
  TrafficState state = init_state(s.global, find_mode(modes, initial_mode), s.ic_amp);
  SwitchState sw = SwitchState::initial(initial_mode);
  CommandHistory history;
  const StepOptions step_options{s.v_floor};

  RunArtifacts a;
  a.scenario = s.name;
  a.k3 = k3;
  for (int i = 0; i < s.global.n_nodes(); ++i) a.state.x.push_back(s.global.node(i));
  a.residual.detector_modes.reserve(models.size());
  for (const auto& m : models) a.residual.detector_modes.push_back(m.params.id);
  a.residual.zeta.resize(models.size());

  const auto n_out = static_cast<long>(std::floor(s.duration / s.output_dt + 1e-9));
  long next_out = 0;
  std::vector<double> zetas(models.size());
  while (true) {
    const double t = state.t;
    const int alpha = s.true_mode_at(t);
    sw = supervisory_update(std::move(sw), alpha, t, s.id_delay, s.dwell_min);
    const int sigma_tilde = apply_attack(sw.sigma, s.attack, t, history);

    ModeParams plant = find_mode(modes, alpha);
    plant.v_free += field.vf_offset();
    const double q_s = field.mainline_flux(s.q_s_base ? *s.q_s_base : plant.q_star, t);
    const double y = measure(state, uspec, noise);
    const double u_sigma = s.ramp.apply(ramp_control(sw.sigma, y, modes, s.feedback));
    const double u_tilde = s.ramp.apply(ramp_control(sigma_tilde, y, modes, s.feedback));

    for (std::size_t j = 0; j < bank.size(); ++j)
      zetas[j] = detector_output(bank[j], y, models[j].derived);

    const double t_out = static_cast<double>(next_out) * s.output_dt;
    const bool on_output = std::abs(t - t_out) <= 1e-9 * std::max(1.0, t_out);
    if (on_output) {
      a.control.t.push_back(t);
      a.control.alpha.push_back(alpha);
      a.control.sigma.push_back(sw.sigma);
      a.control.sigma_tilde.push_back(sigma_tilde);
      a.control.u_sigma.push_back(u_sigma);
      a.control.u_sigma_tilde.push_back(u_tilde);
      a.control.delta.push_back(u_tilde - u_sigma);
      a.control.q_s.push_back(q_s);
      a.control.y.push_back(y);
      a.residual.t.push_back(t);
      for (std::size_t j = 0; j < bank.size(); ++j) a.residual.zeta[j].push_back(zetas[j]);
      a.residual.r.push_back(residual(zetas));
      a.residual.threshold.push_back(threshold);
      if (options.record_state) record_state(a.state, state);
      ++next_out;
      if (next_out > n_out) break;
    }

    const double t_next = static_cast<double>(next_out) * s.output_dt;
    double dt = std::min({stable_dt(state, plant.v_free, s.global), dt_detectors, t_next - t});
    // land exactly on the output grid
    if (t + dt >= t_next - 1e-9) dt = t_next - t;

    for (std::size_t j = 0; j < bank.size(); ++j)
      bank[j] = detector_step(bank[j], u_sigma, y, q_s, gains[j], models[j].derived, dt, s.global)
                    .state;
    state = step(state, plant, u_tilde, q_s, field, dt, s.global, step_options);
    if (std::abs(state.t - t_next) < 1e-9) state.t = t_next;
  }

  a.residual.alarm.assign(a.residual.r.size(), 0);
  std::vector<double> armed_t, armed_r;
  std::size_t first_armed = 0;
  while (first_armed < a.residual.t.size() && a.residual.t[first_armed] < s.threshold.arm_time)
    ++first_armed;
  armed_t.assign(a.residual.t.begin() + static_cast<long>(first_armed), a.residual.t.end());
  armed_r.assign(a.residual.r.begin() + static_cast<long>(first_armed), a.residual.r.end());
  for (const auto& e : detect(armed_t, armed_r, threshold, s.threshold.persistence))
    a.residual.alarm[first_armed + e.sample] = 1;

  GroundTruth truth;
  if (s.attack.kind != AttackKind::none) truth.attack_onset = s.attack.t_start;
  a.summary = summarize(a, truth);
  a.summary.threshold = threshold;
  return a;
}

RunSummary summarize(const RunArtifacts& a, const GroundTruth& truth) {
  RunSummary out;
  out.attack_onset = truth.attack_onset;
  if (!a.residual.threshold.empty()) out.threshold = a.residual.threshold.front();
  const double onset = truth.attack_onset.value_or(std::numeric_limits<double>::infinity());

  for (std::size_t k = 0; k < a.residual.alarm.size(); ++k) {
    if (!a.residual.alarm[k]) continue;
    const double t = a.residual.t[k];
    ++out.alarms;
    if (t < onset) {
      ++out.false_alarms;
    } else if (!out.first_alarm_t) {
      out.first_alarm_t = t;
      out.detection_latency = t - onset;
    }
  }
  if (!truth.attack_onset && out.alarms > 0) {
    for (std::size_t k = 0; k < a.residual.alarm.size(); ++k)
      if (a.residual.alarm[k]) {
        out.first_alarm_t = a.residual.t[k];
        break;
      }
  }

  for (std::size_t k = 0; k < a.state.rho.size(); ++k) {
    const auto& rho = a.state.rho[k];
    const auto it = std::max_element(rho.begin(), rho.end());
    if (it == rho.end()) continue;
    const double t = a.state.t[k];
    if (*it > out.peak_density) {
      out.peak_density = *it;
      out.peak_density_x = a.state.x[static_cast<std::size_t>(it - rho.begin())];
      out.peak_density_t = t;
    }
    if (t < onset)
      out.peak_density_before_onset = std::max(out.peak_density_before_onset, *it);
    else
      out.peak_density_after_onset = std::max(out.peak_density_after_onset, *it);
  }

  double before = 0.0, after = 0.0;
  int nb = 0, na = 0;
  for (std::size_t k = 0; k < a.state.q.size(); ++k) {
    const double outlet = a.state.q[k].back();
    if (a.state.t[k] < onset) {
      before += outlet;
      ++nb;
    } else {
      after += outlet;
      ++na;
    }
  }
  out.mean_outlet_flux_before_onset = nb ? before / nb : 0.0;
  out.mean_outlet_flux_after_onset = na ? after / na : 0.0;
  return out;
}

std::vector<double> nominal_residual_samples(const Scenario& s) {
  Scenario nominal = s;
  nominal.attack = AttackSpec{};
  RunOptions options;
  options.threshold = std::numeric_limits<double>::infinity();
  options.record_state = false;
  const RunArtifacts a = run_scenario(nominal, options);
  std::vector<double> out;
  for (std::size_t k = 0; k < a.residual.t.size(); ++k)
    if (a.residual.t[k] >= s.threshold.arm_time) out.push_back(a.residual.r[k]);
  return out;
}

CalibrationReport monte_carlo_calibrate(const Scenario& s, int n_runs, double target_far) {
  if (n_runs < 20)
    throw Error(ErrorCategory::calibration,
                fmt::format("calibration needs at least 20 runs, got {}", n_runs));
  CalibrationReport report;
  report.runs = n_runs;
  for (int i = 1; i <= n_runs; ++i) report.seeds.push_back(s.seed + static_cast<std::uint64_t>(i));
  // one run per task; results are pooled in seed order so the threshold does
  // not depend on scheduling
  std::vector<std::future<std::vector<double>>> runs;
  runs.reserve(report.seeds.size());
  for (std::uint64_t seed : report.seeds)
    runs.push_back(std::async(std::launch::async,
                              [&s, seed] { return nominal_residual_samples(s.with_seed(seed)); }));
  std::vector<double> pool;
  for (auto& r : runs) {
    const auto samples = r.get();
    pool.insert(pool.end(), samples.begin(), samples.end());
  }
  report.calibration = calibrate_threshold(pool, target_far);
  const double n = static_cast<double>(pool.size());
  report.binomial_halfwidth = 1.96 * std::sqrt(target_far * (1.0 - target_far) / n);
  return report;
}

}  // namespace rampguard
