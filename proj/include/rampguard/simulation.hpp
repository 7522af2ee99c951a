#pragma once

#include <optional>
#include <vector>

#include "rampguard/scenario.hpp"

namespace rampguard {

struct StateSeries {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<std::vector<double>> q;  // [sample][node]
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> rho;
};

struct ControlSeries {
  std::vector<double> t;
  std::vector<int> alpha;
  std::vector<int> sigma;
  std::vector<int> sigma_tilde;
  std::vector<double> u_sigma;
  std::vector<double> u_sigma_tilde;
  std::vector<double> delta;
  std::vector<double> q_s;
  std::vector<double> y;
};

struct ResidualSeries {
  std::vector<double> t;
  std::vector<int> detector_modes;
  std::vector<std::vector<double>> zeta;  // [detector][sample]
  std::vector<double> r;
  std::vector<double> threshold;
  std::vector<int> alarm;  // 1 on samples where an alarm event fires
};

struct RunSummary {
  std::optional<double> attack_onset;
  std::optional<double> first_alarm_t;
  std::optional<double> detection_latency;  // empty with an attack means missed
  int false_alarms = 0;
  int alarms = 0;
  double peak_density = 0.0;
  double peak_density_x = 0.0;
  double peak_density_t = 0.0;
  double peak_density_before_onset = 0.0;
  double peak_density_after_onset = 0.0;
  double mean_outlet_flux_before_onset = 0.0;
  double mean_outlet_flux_after_onset = 0.0;
  double threshold = 0.0;
};

struct RunArtifacts {
  std::string scenario;
  StateSeries state;
  ControlSeries control;
  ResidualSeries residual;
  std::vector<double> k3;  // per detector
  RunSummary summary;
};

struct RunOptions {
  std::optional<double> threshold;  // overrides the scenario threshold config
  bool record_state = true;
};

/// Threshold from the scenario config, calibrating when no fixed value is given.
double resolve_threshold(const Scenario& s);

std::vector<double> resolve_k3(const Scenario& s);

RunArtifacts run_scenario(const Scenario& s, const RunOptions& options = {});

struct GroundTruth {
  std::optional<double> attack_onset;
};

RunSummary summarize(const RunArtifacts& a, const GroundTruth& truth);

struct CalibrationReport {
  Calibration calibration;
  int runs = 0;
  double binomial_halfwidth = 0.0;  // 95% normal approximation on the pooled rate
  std::vector<std::uint64_t> seeds;
};

/// Pools post-arming residual samples of attack-free runs with seeds
/// s.seed + 1 ... s.seed + n_runs.
CalibrationReport monte_carlo_calibrate(const Scenario& s, int n_runs, double target_far);

/// Attack-free residual samples after the arming time for one seed.
std::vector<double> nominal_residual_samples(const Scenario& s);

}  // namespace rampguard
