#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rampguard/traffic_core.hpp"
#include "rampguard/tuning.hpp"

namespace rampguard {

struct KernelValues {
  double r = 0.0;  // 1/m
  double s = 0.0;  // 1/m
};

/// Kernels of the map from detector error (omega, vartheta) to the decoupled
/// target state (phi, psi); defined on 0 <= x <= z <= L.
KernelValues kernels(const DerivedConstants& mode, double x, double z);

/// Kernels of the exact inverse map (target state back to error).
KernelValues inverse_kernels(const DerivedConstants& mode, double x, double z);

/// decoupling: gains that map the error system exactly onto the target system
///             (k1 constant, k2 following the in-domain coupling decay)
/// published:  k1(x) = (v*/c) R(x, L), k2(x) = (v*/c) S(x, L)
/// Both forms coincide at x = L.
enum class GainForm { decoupling, published };

/// consistent: lambda = l - c k3; literal: lambda = l - k3
enum class LambdaConvention { consistent, literal };

struct GainSet {
  std::vector<double> k1;  // 1/s
  std::vector<double> k2;  // 1/s
  double k3 = 0.0;
  double lambda = 0.0;
  GainForm form = GainForm::decoupling;

  /// Discrete L2 norms squared over the normalized coordinate x / L.
  double k1_norm_sq(double time_scale = 1.0) const;
  double k2_norm_sq(double time_scale = 1.0) const;
};

double outlet_lambda(double l, double c, double k3, LambdaConvention convention);

GainSet compute_gains(const DerivedConstants& mode, const GlobalParams& global, double k3,
                      GainForm form = GainForm::decoupling,
                      LambdaConvention convention = LambdaConvention::consistent);

/// k3 = upsilon7 / (2 mu_1) in physical units. Throws when no k3 is admissible.
double select_k3(const DerivedConstants& mode, const TuningParams& tuning,
                 const Normalization& normalization = {});

/// k3 placing the outlet reflection of the target system at zero.
double deadbeat_k3(const DerivedConstants& mode);

struct DetectorState {
  int j = 0;
  std::vector<double> w_hat;  // veh/s
  std::vector<double> v_hat;  // veh/s
  double zeta = 0.0;

  /// Steady profile of mode j (zero in deviation variables).
  static DetectorState steady(int j, const GlobalParams& global);
};

struct DetectorStepResult {
  DetectorState state;
  double zeta = 0.0;
};

double detector_stable_dt(const DerivedConstants& mode, const GlobalParams& global);

double detector_output(const DetectorState& det, double y, const DerivedConstants& mode);

/// Output is computed from the pre-step state and injected during the step.
DetectorStepResult detector_step(const DetectorState& det, double u_sigma, double y, double q_s,
                                 const GainSet& gains, const DerivedConstants& mode, double dt,
                                 const GlobalParams& global);

double residual(std::span<const double> zetas);

struct Calibration {
  double threshold = 0.0;
  double exceedance_rate = 0.0;
  std::size_t samples = 0;
};

Calibration calibrate_threshold(std::span<const double> nominal_residuals, double target_far);

struct AlarmEvent {
  double t = 0.0;
  std::size_t sample = 0;
  std::optional<double> latency;  // relative to attack onset when known
};

std::vector<AlarmEvent> detect(std::span<const double> t, std::span<const double> r,
                               double threshold, int persistence,
                               std::optional<double> attack_onset = std::nullopt);

struct FieldPair {
  std::vector<double> first;
  std::vector<double> second;
};

/// (omega, vartheta) -> (phi, psi), trapezoid quadrature on the mesh.
FieldPair backstep_transform(std::span<const double> omega, std::span<const double> vartheta,
                             const DerivedConstants& mode, const GlobalParams& global);

/// (phi, psi) -> (omega, vartheta), trapezoid quadrature on the mesh.
FieldPair inverse_backstep_transform(std::span<const double> phi, std::span<const double> psi,
                                     const DerivedConstants& mode, const GlobalParams& global);

}  // namespace rampguard
