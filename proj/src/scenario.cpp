#include "rampguard/scenario.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "rampguard/error.hpp"

namespace rampguard {

void Scenario::validate() const {
  global.validate();
  if (modes.empty()) throw Error(ErrorCategory::config, "scenario defines no modes");
  std::set<int> ids;
  for (const auto& m : effective_modes()) {
    m.validate(global);
    if (!ids.insert(m.id).second)
      throw Error(ErrorCategory::config, fmt::format("duplicate mode id {}", m.id));
    derive_mode_constants(m, global);
  }
  if (schedule.empty() || schedule.front().start != 0.0)
    throw Error(ErrorCategory::config, "mode schedule must start at t = 0");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!ids.count(schedule[i].mode))
      throw Error(ErrorCategory::config,
                  fmt::format("schedule references unknown mode {}", schedule[i].mode));
    if (i > 0 && !(schedule[i].start > schedule[i - 1].start))
      throw Error(ErrorCategory::config, "mode schedule start times must increase");
  }
  if (!(duration > 0.0)) throw Error(ErrorCategory::config, "duration must be positive");
  if (!(schedule.back().start < duration))
    throw Error(ErrorCategory::config, "last schedule entry starts after the run ends");
  if (!(output_dt > 0.0) || output_dt > duration)
    throw Error(ErrorCategory::config, "output_dt must lie in (0, duration]");
  if (id_delay < 0.0 || dwell_min < 0.0)
    throw Error(ErrorCategory::config, "id_delay and dwell_min must be nonnegative");
  if (q_s_base && !(*q_s_base > 0.0))
    throw Error(ErrorCategory::config, "mainline flux must be positive");
  if (!(ramp.u_min <= 0.0 && ramp.u_max >= 0.0))
    throw Error(ErrorCategory::config, "ramp limits must bracket zero");
  if (!(v_floor > 0.0)) throw Error(ErrorCategory::config, "v_floor must be positive");
  if (!(ic_amp >= 0.0 && ic_amp < 0.5))
    throw Error(ErrorCategory::config, "initial amplitude must lie in [0, 0.5)");
  uncertainty.validate();
  attack.validate(modes);
  if (detectors.k3_source == K3Source::fixed)
    for (int id : ids)
      if (!detectors.k3.count(id))
        throw Error(ErrorCategory::config, fmt::format("no k3 given for mode {}", id));
  if (threshold.fixed && !(*threshold.fixed >= 0.0))
    throw Error(ErrorCategory::config, "threshold must be nonnegative");
  if (!(threshold.target_far > 0.0 && threshold.target_far < 1.0))
    throw Error(ErrorCategory::config, "target false-alarm rate must lie in (0, 1)");
  if (threshold.persistence < 1)
    throw Error(ErrorCategory::config, "persistence must be at least 1");
  if (threshold.arm_time < 0.0 || threshold.arm_time >= duration)
    throw Error(ErrorCategory::config, "arm_time must lie in [0, duration)");
}

int Scenario::true_mode_at(double t) const {
  int mode = schedule.front().mode;
  for (const auto& seg : schedule)
    if (seg.start <= t) mode = seg.mode;
  return mode;
}

std::vector<ModeParams> Scenario::effective_modes() const {
  std::vector<ModeParams> out;
  out.reserve(modes.size());
  for (const auto& m : modes) out.push_back(apply_equilibrium_policy(m, global, equilibrium));
  return out;
}

Scenario Scenario::with_seed(std::uint64_t s) const {
  Scenario out = *this;
  out.seed = s;
  out.uncertainty.seed = s;
  return out;
}

Scenario reference_scenario() {
  Scenario s;
  s.name = "reference";
  s.modes = reference_modes();
  s.schedule = {{0.0, 1}};
  return s;
}

}  // namespace rampguard
