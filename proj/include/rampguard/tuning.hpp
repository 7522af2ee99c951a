#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "rampguard/traffic_core.hpp"

namespace rampguard {

/// Rescaling used by the certifier: x_hat = x / L so the domain is [0, 1],
/// t_hat = t / time_scale.
struct Normalization {
  double time_scale = 1.0;  // s

  void validate() const;
};

/// Mode constants in normalized units. h, l and c are scale free.
struct NormalizedMode {
  double length = 1.0;
  double v_star = 0.0;
  double tau = 0.0;
  double p_star = 0.0;
  double gamma = 1.0;
  double h = 0.0;
  double l = 0.0;
  double c = 0.0;

  double tau_gp() const { return tau * gamma * p_star; }
};

NormalizedMode normalize(const DerivedConstants& d, const Normalization& n);

/// Free parameters of the stability and robustness conditions.
struct TuningParams {
  std::array<double, 16> mu{};  // mu[0] is mu_1
  double xi = std::exp(1.0) - 1.0;
  double upsilon5 = 1.0;
  double upsilon6 = 1.0;
  double upsilon16 = 1.0;

  double mu_at(int i) const { return mu.at(static_cast<std::size_t>(i - 1)); }
  void validate() const;
  static TuningParams defaults();
};

/// Expression under the square root of the k3 upper bound.
template <class Real>
Real upsilon7_radicand(const Real& v_hat, const Real& h, const Real& c, const Real& transit,
                       const Real& length, const Real& mu1, const Real& mu2, const Real& mu3) {
  using std::exp;
  const Real num = v_hat - mu2 * exp(-length) - c * c * exp(length);
  return num / (mu3 * v_hat * h * exp(2 * length)) - mu1 * exp(-2 * transit);
}

double upsilon7_radicand(const NormalizedMode& m, const TuningParams& tuning);

/// Upper bound on mu_1 * k3; empty when the radicand is negative.
std::optional<double> upsilon7(const NormalizedMode& m, const TuningParams& tuning);

}  // namespace rampguard
