#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rampguard/arz_sim.hpp"
#include "rampguard/control_plane.hpp"
#include "rampguard/detector_bank.hpp"
#include "rampguard/traffic_core.hpp"

namespace rampguard {

struct ModeSegment {
  double start = 0.0;  // s
  int mode = 1;
};

enum class K3Source { zero, deadbeat, fixed, certificate };

struct DetectorConfig {
  GainForm gain_form = GainForm::decoupling;
  LambdaConvention lambda = LambdaConvention::consistent;
  K3Source k3_source = K3Source::zero;
  std::map<int, double> k3;          // per mode, used with K3Source::fixed
  std::filesystem::path certificate;  // used with K3Source::certificate
};

struct ThresholdConfig {
  std::optional<double> fixed;  // veh/s
  double target_far = 0.15;
  int calibration_runs = 40;
  int persistence = 1;
  double arm_time = 0.0;  // s; residual samples before this are neither pooled nor alarmed
};

// Bounds on the ramp command. The ramp can neither absorb more than its
// nominal release nor exceed its capacity.
struct RampLimits {
  double u_min = -std::numeric_limits<double>::infinity();  // veh/s
  double u_max = std::numeric_limits<double>::infinity();   // veh/s
  double apply(double u) const { return std::clamp(u, u_min, u_max); }
};

struct Scenario {
  std::string name;
  GlobalParams global;
  EquilibriumPolicy equilibrium = EquilibriumPolicy::table;
  std::vector<ModeParams> modes;
  std::vector<ModeSegment> schedule;
  double id_delay = 40.0;
  double dwell_min = 60.0;
  UncertaintySpec uncertainty;
  AttackSpec attack;
  std::optional<double> q_s_base;  // veh/s; empty means track q* of the true mode
  FeedbackSign feedback = FeedbackSign::restoring;
  RampLimits ramp;
  double duration = 600.0;
  double output_dt = 1.0;
  std::uint64_t seed = 1;
  double ic_amp = 0.1;
  double v_floor = 0.1;
  DetectorConfig detectors;
  ThresholdConfig threshold;

  void validate() const;
  int true_mode_at(double t) const;
  std::vector<ModeParams> effective_modes() const;  // equilibrium policy applied
  Scenario with_seed(std::uint64_t s) const;
};

/// Default experiment: three reference modes on a 1 km segment.
Scenario reference_scenario();

}  // namespace rampguard
