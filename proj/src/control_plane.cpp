#include "rampguard/control_plane.hpp"

#include <fmt/format.h>

#include "rampguard/error.hpp"

namespace rampguard {

double ramp_control(int sigma, double y, const std::vector<ModeParams>& modes,
                    FeedbackSign sign) {
  const ModeParams& m = find_mode(modes, sigma);
  const double err = y - m.q_star;
  return sign == FeedbackSign::published ? m.k_ctrl * err : -m.k_ctrl * err;
}

SwitchState SwitchState::initial(int mode) {
  SwitchState sw;
  sw.sigma = mode;
  sw.identified_mode = mode;
  sw.observed_true_mode = mode;
  return sw;
}

std::optional<PendingIdentification> SwitchState::next_pending() const {
  if (pending.empty()) return std::nullopt;
  return pending.front();
}

SwitchState supervisory_update(SwitchState sw, int true_mode, double t, double id_delay,
                               double dwell_min) {
  if (true_mode != sw.observed_true_mode) {
    sw.pending.push_back({true_mode, t + id_delay});
    sw.observed_true_mode = true_mode;
  }
  while (!sw.pending.empty() && sw.pending.front().activation_t <= t) {
    sw.identified_mode = sw.pending.front().mode;
    sw.pending.pop_front();
  }
  if (sw.identified_mode != sw.sigma && t - sw.last_switch_t >= dwell_min) {
    sw.sigma = sw.identified_mode;
    sw.last_switch_t = t;
  }
  return sw;
}

void AttackSpec::validate(const std::vector<ModeParams>& modes) const {
  if (kind == AttackKind::none) return;
  if (!(t_start >= 0.0)) throw Error(ErrorCategory::config, "attack onset must be nonnegative");
  if (kind == AttackKind::fdi) find_mode(modes, forced_mode);
}

int apply_attack(int sigma_commanded, const AttackSpec& attack, double t,
                 CommandHistory& history) {
  switch (attack.kind) {
    case AttackKind::none:
      return sigma_commanded;
    case AttackKind::dos:
      if (t < attack.t_start || !history.before_onset) {
        history.before_onset = sigma_commanded;
        if (t < attack.t_start) return sigma_commanded;
      }
      return *history.before_onset;
    case AttackKind::fdi:
      return t >= attack.t_start ? attack.forced_mode : sigma_commanded;
  }
  return sigma_commanded;
}

double attack_delta(int sigma, int sigma_tilde, double y, const std::vector<ModeParams>& modes,
                    FeedbackSign sign) {
  if (sigma == sigma_tilde) return 0.0;
  return ramp_control(sigma_tilde, y, modes, sign) - ramp_control(sigma, y, modes, sign);
}

}  // namespace rampguard
