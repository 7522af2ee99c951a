#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rampguard/traffic_core.hpp"

namespace rampguard {

/// Nodal flux and velocity fields on the uniform mesh x_i = i * dx, i = 0..n_cells.
struct TrafficState {
  double t = 0.0;
  std::vector<double> q;  // veh/s
  std::vector<double> v;  // m/s

  double density(std::size_t i) const { return q[i] / v[i]; }
};

struct UncertaintySpec {
  double eta_rel_amp = 0.0012;
  double eta_freq_q = 0.01;  // Hz
  double eta_freq_v = 0.01;  // Hz
  double vf_offset = 2.5;    // m/s, realized offset is uniform in [-vf_offset, vf_offset]
  double qs_rel_amp = 0.10;
  double qs_freq = 0.005;  // Hz
  double meas_rel_amp = 0.02;
  std::uint64_t seed = 1;

  void validate() const;
  static UncertaintySpec none();
};

struct EtaSample {
  double eta_q = 0.0;  // veh/s^2
  double eta_v = 0.0;  // m/s^2
};

/// Seeded realization of every random quantity except measurement noise.
class UncertaintyField {
 public:
  explicit UncertaintyField(const UncertaintySpec& spec);

  EtaSample sample(double q_star, double v_star, double x, double t, double length) const;
  double mainline_flux(double base, double t) const;
  double vf_offset() const { return vf_offset_; }
  const UncertaintySpec& spec() const { return spec_; }

 private:
  UncertaintySpec spec_;
  double phase_q_ = 0.0;
  double phase_v_ = 0.0;
  double phase_qs_ = 0.0;
  double vf_offset_ = 0.0;
};

EtaSample sample_uncertainty(const UncertaintySpec& spec, const ModeParams& mode, double x,
                             double t, double length);

TrafficState init_state(const GlobalParams& global, const ModeParams& mode, double ic_amp);

struct StepOptions {
  double v_floor = 0.1;  // m/s
};

/// Largest admissible step for the current state.
double stable_dt(const TrafficState& state, double v_free, const GlobalParams& global);

/// Advance the nonlinear plant one explicit upwind step. `plant_mode.v_free` is
/// the effective (possibly perturbed) free-flow speed.
TrafficState step(const TrafficState& state, const ModeParams& plant_mode, double u_boundary,
                  double q_s, const UncertaintyField& field, double dt,
                  const GlobalParams& global, const StepOptions& options = {});

double measure(const TrafficState& state, const UncertaintySpec& spec, std::mt19937_64& rng);

}  // namespace rampguard
