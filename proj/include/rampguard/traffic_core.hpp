#pragma once

#include <vector>

namespace rampguard {

enum class EquilibriumPolicy { table, exact };

/// Road geometry, fundamental-diagram constants shared by every mode, and
/// discretization settings. SI units throughout (m, s, veh/m, veh/s).
struct GlobalParams {
  double length = 1000.0;  // m
  double rho_max = 0.16;   // veh/m
  double tau = 60.0;       // s
  double gamma = 1.0;
  int n_cells = 100;
  double cfl = 0.9;

  void validate() const;
  double dx() const { return length / n_cells; }
  int n_nodes() const { return n_cells + 1; }
  double node(int i) const { return i * dx(); }
};

struct ModeParams {
  int id = 1;
  double v_free = 0.0;    // m/s
  double rho_star = 0.0;  // veh/m
  double v_star = 0.0;    // m/s
  double q_star = 0.0;    // veh/s
  double k_ctrl = 0.0;

  void validate(const GlobalParams& global) const;
};

/// Constants of the linearized (W, V) model around a mode's steady state.
/// Carries the handful of base quantities the kernels and gains need so that
/// detector code can work from this struct alone.
struct DerivedConstants {
  int mode_id = 0;
  double length = 0.0;
  double tau = 0.0;
  double gamma = 0.0;
  double v_star = 0.0;
  double q_star = 0.0;

  double p_star = 0.0;
  double h = 0.0;
  double l = 0.0;
  double c = 0.0;
  double tau_gp = 0.0;  // tau * gamma * p_star, m

  double beta(double x) const;
  // Characteristic speeds of the W (rightward) and V (leftward) transport.
  double w_speed() const { return v_star; }
  double v_speed() const { return v_star * h; }
};

struct ModeModel {
  ModeParams params;
  DerivedConstants derived;
};

/// Mismatch between plant mode alpha and detector mode j; exactly zero when
/// both are the same mode.
struct ThetaSet {
  double theta_v = 0.0;
  double theta_hv = 0.0;
  double theta_h = 0.0;
  double theta_q = 0.0;
  double theta_l = 0.0;
  double theta_c = 0.0;
  double theta_k = 0.0;

  double theta_beta(double x) const;

  // beta(x) parameters of the two modes
  double tau = 0.0;
  double v_plant = 0.0;
  double v_detector = 0.0;
};

ModeParams apply_equilibrium_policy(const ModeParams& mode, const GlobalParams& global,
                                    EquilibriumPolicy policy);

DerivedConstants derive_mode_constants(const ModeParams& mode, const GlobalParams& global);
ModeModel make_mode_model(const ModeParams& mode, const GlobalParams& global);
std::vector<ModeModel> make_mode_models(const std::vector<ModeParams>& modes,
                                        const GlobalParams& global);

double pressure(double density, const ModeParams& mode, const GlobalParams& global);
double pressure(double density, double v_free, const GlobalParams& global);

double equilibrium_velocity_residual(const ModeParams& mode, const GlobalParams& global);

struct WV {
  double w = 0.0;
  double v = 0.0;
};

struct FluxVelocity {
  double q = 0.0;
  double v = 0.0;
};

WV to_wv(double q_dev, double v_dev, double x, const DerivedConstants& d);
FluxVelocity from_wv(double w, double v, double x, const DerivedConstants& d);

ThetaSet mismatch_params(const DerivedConstants& plant, const DerivedConstants& detector,
                         double k3);

const ModeParams& find_mode(const std::vector<ModeParams>& modes, int id);
const ModeModel& find_mode(const std::vector<ModeModel>& modes, int id);

/// Rows of the three-mode reference table in SI units.
std::vector<ModeParams> reference_modes();

}  // namespace rampguard
