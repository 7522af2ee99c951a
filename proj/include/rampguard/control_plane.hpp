#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "rampguard/traffic_core.hpp"

namespace rampguard {

/// Sign convention of the ramp feedback law.
///   published: U = k (y - q*)
///   restoring: U = k (q* - y), the ramp releases fewer vehicles when the
///              outlet flux is above its set point
enum class FeedbackSign { published, restoring };

double ramp_control(int sigma, double y, const std::vector<ModeParams>& modes,
                    FeedbackSign sign = FeedbackSign::published);

struct PendingIdentification {
  int mode = 0;
  double activation_t = 0.0;
};

struct SwitchState {
  int sigma = 1;
  double last_switch_t = -std::numeric_limits<double>::infinity();
  int identified_mode = 1;
  int observed_true_mode = 1;  // last true mode seen by the supervisor
  std::deque<PendingIdentification> pending;

  static SwitchState initial(int mode);
  std::optional<PendingIdentification> next_pending() const;
};

/// Oracle-with-delay supervisor: a true-mode change at t0 is identified at
/// t0 + id_delay and the command follows it subject to the dwell time.
SwitchState supervisory_update(SwitchState sw, int true_mode, double t, double id_delay,
                               double dwell_min);

enum class AttackKind { none, dos, fdi };

struct AttackSpec {
  AttackKind kind = AttackKind::none;
  double t_start = 0.0;
  int forced_mode = 0;

  void validate(const std::vector<ModeParams>& modes) const;
  bool active(double t) const { return kind != AttackKind::none && t >= t_start; }
};

/// Commanded mode in force just before the attack onset.
struct CommandHistory {
  std::optional<int> before_onset;
};

int apply_attack(int sigma_commanded, const AttackSpec& attack, double t,
                 CommandHistory& history);

double attack_delta(int sigma, int sigma_tilde, double y, const std::vector<ModeParams>& modes,
                    FeedbackSign sign = FeedbackSign::published);

}  // namespace rampguard
