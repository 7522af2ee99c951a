#include "rampguard/scenario_io.hpp"

#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "rampguard/error.hpp"
#include "rampguard/tuning_io.hpp"

namespace rampguard {

namespace {

constexpr const char* scenario_format = "rampguard-scenario/1";

enum class Quantity { length, time, density, flux, speed };

struct UnitTable {
  std::map<Quantity, double> to_si{{Quantity::length, 1.0},
                                   {Quantity::time, 1.0},
                                   {Quantity::density, 1.0},
                                   {Quantity::flux, 1.0},
                                   {Quantity::speed, 1.0}};
};

const std::map<std::string, std::map<std::string, double>>& known_units() {
  static const std::map<std::string, std::map<std::string, double>> table{
      {"length", {{"m", 1.0}, {"km", 1000.0}}},
      {"time", {{"s", 1.0}, {"min", 60.0}, {"h", 3600.0}}},
      {"density", {{"veh/m", 1.0}, {"veh/km", 1e-3}}},
      {"flux", {{"veh/s", 1.0}, {"veh/min", 1.0 / 60.0}, {"veh/h", 1.0 / 3600.0}}},
      {"speed", {{"m/s", 1.0}, {"km/h", 1.0 / 3.6}}},
  };
  return table;
}

Quantity quantity_of(const std::string& name) {
  static const std::map<std::string, Quantity> q{{"length", Quantity::length},
                                                 {"time", Quantity::time},
                                                 {"density", Quantity::density},
                                                 {"flux", Quantity::flux},
                                                 {"speed", Quantity::speed}};
  return q.at(name);
}

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg,
                         ErrorCategory cat = ErrorCategory::parse) const {
    const int line = at.Mark().line >= 0 ? at.Mark().line + 1 : 0;
    throw Error(cat, fmt::format("{}:{}: {}", origin_, line, msg));
  }

  void require_map(const YAML::Node& n, const std::string& what) const {
    if (!n.IsMap()) fail(n, fmt::format("'{}' must be a mapping", what));
  }

  void check_keys(const YAML::Node& n, const std::set<std::string>& allowed,
                  const std::string& section) const {
    require_map(n, section);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, fmt::format("unknown key '{}' in {}", key, section));
    }
  }

  YAML::Node field(const YAML::Node& n, const std::string& key, const std::string& section) const {
    const YAML::Node v = n[key];
    if (!v) fail(n, fmt::format("missing field '{}' in {}", key, section));
    return v;
  }

  double number(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) fail(v, fmt::format("'{}' must be a number", key));
    try {
      const double x = v.as<double>();
      if (!std::isfinite(x)) fail(v, fmt::format("'{}' must be finite", key));
      return x;
    } catch (const YAML::BadConversion&) {
      fail(v, fmt::format("'{}' is not a number: '{}'", key, v.Scalar()));
    }
  }

  int integer(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) fail(v, fmt::format("'{}' must be an integer", key));
    try {
      return v.as<int>();
    } catch (const YAML::BadConversion&) {
      fail(v, fmt::format("'{}' is not an integer: '{}'", key, v.Scalar()));
    }
  }

  std::string word(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) fail(v, fmt::format("'{}' must be a scalar", key));
    return v.Scalar();
  }

  double quantity(const YAML::Node& v, const std::string& key, Quantity q) const {
    return number(v, key) * units_.to_si.at(q);
  }

  double frequency(const YAML::Node& v, const std::string& key) const {
    return number(v, key) / units_.to_si.at(Quantity::time);
  }

  void read_units(const YAML::Node& n) {
    check_keys(n, {"length", "time", "density", "flux", "speed"}, "units");
    for (const auto& [name, options] : known_units()) {
      const YAML::Node v = field(n, name, "units");
      const std::string unit = word(v, name);
      const auto it = options.find(unit);
      if (it == options.end())
        fail(v, fmt::format("unknown {} unit '{}'", name, unit), ErrorCategory::unit);
      units_.to_si[quantity_of(name)] = it->second;
    }
  }

 private:
  std::string origin_;
  UnitTable units_;
};

template <typename T>
T pick(const Reader& r, const YAML::Node& v, const std::string& key,
       const std::map<std::string, T>& options) {
  const std::string w = r.word(v, key);
  const auto it = options.find(w);
  if (it == options.end()) r.fail(v, fmt::format("invalid value '{}' for '{}'", w, key));
  return it->second;
}

void read_road(const Reader& r, const YAML::Node& n, GlobalParams& g) {
  r.check_keys(n, {"length", "rho_max", "tau", "gamma", "n_cells", "cfl"}, "road");
  g.length = r.quantity(r.field(n, "length", "road"), "length", Quantity::length);
  g.rho_max = r.quantity(r.field(n, "rho_max", "road"), "rho_max", Quantity::density);
  g.tau = r.quantity(r.field(n, "tau", "road"), "tau", Quantity::time);
  g.gamma = r.number(r.field(n, "gamma", "road"), "gamma");
  if (n["n_cells"]) g.n_cells = r.integer(n["n_cells"], "n_cells");
  if (n["cfl"]) g.cfl = r.number(n["cfl"], "cfl");
}

std::vector<ModeParams> read_modes(const Reader& r, const YAML::Node& n) {
  if (!n.IsSequence() || n.size() == 0) r.fail(n, "'modes' must be a non-empty list");
  std::vector<ModeParams> out;
  for (const auto& m : n) {
    r.check_keys(m, {"id", "v_free", "rho_star", "v_star", "q_star", "k"}, "mode");
    ModeParams p;
    p.id = r.integer(r.field(m, "id", "mode"), "id");
    p.v_free = r.quantity(r.field(m, "v_free", "mode"), "v_free", Quantity::speed);
    p.rho_star = r.quantity(r.field(m, "rho_star", "mode"), "rho_star", Quantity::density);
    p.v_star = r.quantity(r.field(m, "v_star", "mode"), "v_star", Quantity::speed);
    p.q_star = r.quantity(r.field(m, "q_star", "mode"), "q_star", Quantity::flux);
    p.k_ctrl = r.number(r.field(m, "k", "mode"), "k");
    out.push_back(p);
  }
  return out;
}

std::vector<ModeSegment> read_schedule(const Reader& r, const YAML::Node& n) {
  if (!n.IsSequence() || n.size() == 0) r.fail(n, "'schedule' must be a non-empty list");
  std::vector<ModeSegment> out;
  for (const auto& seg : n) {
    r.check_keys(seg, {"start", "mode"}, "schedule entry");
    ModeSegment s;
    s.start = r.quantity(r.field(seg, "start", "schedule entry"), "start", Quantity::time);
    s.mode = r.integer(r.field(seg, "mode", "schedule entry"), "mode");
    if (out.empty() && s.start != 0.0) r.fail(seg, "schedule must start at t = 0");
    if (!out.empty() && !(s.start > out.back().start))
      r.fail(seg, "schedule start times must increase");
    out.push_back(s);
  }
  return out;
}

void read_uncertainty(const Reader& r, const YAML::Node& n, UncertaintySpec& u) {
  if (n.IsScalar() && n.Scalar() == "none") {
    u = UncertaintySpec::none();
    return;
  }
  r.check_keys(n,
               {"eta_rel_amp", "eta_freq_q", "eta_freq_v", "vf_offset", "qs_rel_amp", "qs_freq",
                "meas_rel_amp"},
               "uncertainty");
  if (n["eta_rel_amp"]) u.eta_rel_amp = r.number(n["eta_rel_amp"], "eta_rel_amp");
  if (n["eta_freq_q"]) u.eta_freq_q = r.frequency(n["eta_freq_q"], "eta_freq_q");
  if (n["eta_freq_v"]) u.eta_freq_v = r.frequency(n["eta_freq_v"], "eta_freq_v");
  if (n["vf_offset"]) u.vf_offset = r.quantity(n["vf_offset"], "vf_offset", Quantity::speed);
  if (n["qs_rel_amp"]) u.qs_rel_amp = r.number(n["qs_rel_amp"], "qs_rel_amp");
  if (n["qs_freq"]) u.qs_freq = r.frequency(n["qs_freq"], "qs_freq");
  if (n["meas_rel_amp"]) u.meas_rel_amp = r.number(n["meas_rel_amp"], "meas_rel_amp");
}

void read_attack(const Reader& r, const YAML::Node& n, AttackSpec& a) {
  r.check_keys(n, {"kind", "t_start", "forced_mode"}, "attack");
  a.kind = pick<AttackKind>(r, r.field(n, "kind", "attack"), "kind",
                            {{"none", AttackKind::none},
                             {"dos", AttackKind::dos},
                             {"fdi", AttackKind::fdi}});
  if (a.kind == AttackKind::none) return;
  a.t_start = r.quantity(r.field(n, "t_start", "attack"), "t_start", Quantity::time);
  if (a.kind == AttackKind::fdi)
    a.forced_mode = r.integer(r.field(n, "forced_mode", "attack"), "forced_mode");
  else if (n["forced_mode"])
    r.fail(n["forced_mode"], "forced_mode only applies to fdi attacks");
}

void read_control(const Reader& r, const YAML::Node& n, Scenario& s) {
  r.check_keys(n, {"feedback", "u_min", "u_max"}, "control");
  if (n["feedback"])
    s.feedback = pick<FeedbackSign>(
        r, n["feedback"], "feedback",
        {{"published", FeedbackSign::published}, {"restoring", FeedbackSign::restoring}});
  if (n["u_min"]) s.ramp.u_min = r.quantity(n["u_min"], "u_min", Quantity::flux);
  if (n["u_max"]) s.ramp.u_max = r.quantity(n["u_max"], "u_max", Quantity::flux);
}

void read_detectors(const Reader& r, const YAML::Node& n, DetectorConfig& d,
                    const std::filesystem::path& base_dir) {
  r.check_keys(n, {"gain_form", "lambda", "k3", "certificate"}, "detectors");
  if (n["gain_form"])
    d.gain_form = pick<GainForm>(
        r, n["gain_form"], "gain_form",
        {{"decoupling", GainForm::decoupling}, {"published", GainForm::published}});
  if (n["lambda"])
    d.lambda = pick<LambdaConvention>(
        r, n["lambda"], "lambda",
        {{"consistent", LambdaConvention::consistent}, {"literal", LambdaConvention::literal}});
  if (const YAML::Node k3 = n["k3"]) {
    if (k3.IsMap()) {
      d.k3_source = K3Source::fixed;
      for (const auto& kv : k3) {
        const int id = r.integer(kv.first, "k3 mode id");
        d.k3[id] = r.number(kv.second, "k3");
      }
    } else {
      d.k3_source = pick<K3Source>(r, k3, "k3",
                                   {{"zero", K3Source::zero},
                                    {"deadbeat", K3Source::deadbeat},
                                    {"certificate", K3Source::certificate}});
    }
  }
  if (n["certificate"]) {
    std::filesystem::path p = r.word(n["certificate"], "certificate");
    d.certificate = p.is_relative() ? base_dir / p : p;
  }
  if (d.k3_source == K3Source::certificate && d.certificate.empty())
    r.fail(n, "k3: certificate needs a 'certificate' path");
}

void read_threshold(const Reader& r, const YAML::Node& n, ThresholdConfig& t) {
  r.check_keys(n, {"fixed", "target_far", "calibration_runs", "persistence", "arm_time"},
               "threshold");
  if (n["fixed"]) t.fixed = r.quantity(n["fixed"], "fixed", Quantity::flux);
  if (n["target_far"]) t.target_far = r.number(n["target_far"], "target_far");
  if (n["calibration_runs"]) t.calibration_runs = r.integer(n["calibration_runs"], "calibration_runs");
  if (n["persistence"]) t.persistence = r.integer(n["persistence"], "persistence");
  if (n["arm_time"]) t.arm_time = r.quantity(n["arm_time"], "arm_time", Quantity::time);
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin,
                             const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCategory::parse,
                fmt::format("{}:{}: {}", origin, e.mark.line + 1, e.msg));
  }
  if (!root || root.IsNull()) throw Error(ErrorCategory::parse, fmt::format("{}:1: empty scenario", origin));

  Reader r(origin);
  r.check_keys(root,
               {"format", "units", "name", "seed", "duration", "output_dt", "road", "equilibrium",
                "modes", "schedule", "supervisor", "control", "mainline", "uncertainty",
                "initial", "solver", "attack", "detectors", "threshold"},
               "scenario");
  const YAML::Node fmt_node = r.field(root, "format", "scenario");
  if (r.word(fmt_node, "format") != scenario_format)
    r.fail(fmt_node, fmt::format("expected format '{}'", scenario_format));
  r.read_units(r.field(root, "units", "scenario"));

  Scenario s;
  s.name = r.word(r.field(root, "name", "scenario"), "name");
  if (root["seed"]) {
    try {
      s.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::BadConversion&) {
      r.fail(root["seed"], "'seed' must be a nonnegative integer");
    }
  }
  s.duration = r.quantity(r.field(root, "duration", "scenario"), "duration", Quantity::time);
  if (root["output_dt"]) s.output_dt = r.quantity(root["output_dt"], "output_dt", Quantity::time);
  read_road(r, r.field(root, "road", "scenario"), s.global);
  if (root["equilibrium"])
    s.equilibrium = pick<EquilibriumPolicy>(
        r, root["equilibrium"], "equilibrium",
        {{"table", EquilibriumPolicy::table}, {"exact", EquilibriumPolicy::exact}});
  s.modes = read_modes(r, r.field(root, "modes", "scenario"));
  s.schedule = read_schedule(r, r.field(root, "schedule", "scenario"));

  if (const YAML::Node sup = root["supervisor"]) {
    r.check_keys(sup, {"id_delay", "dwell_min"}, "supervisor");
    if (sup["id_delay"]) s.id_delay = r.quantity(sup["id_delay"], "id_delay", Quantity::time);
    if (sup["dwell_min"]) s.dwell_min = r.quantity(sup["dwell_min"], "dwell_min", Quantity::time);
  }
  if (const YAML::Node c = root["control"]) read_control(r, c, s);
  if (const YAML::Node m = root["mainline"]) {
    r.check_keys(m, {"q_s_base"}, "mainline");
    const YAML::Node q = r.field(m, "q_s_base", "mainline");
    if (!(q.IsScalar() && q.Scalar() == "track"))
      s.q_s_base = r.quantity(q, "q_s_base", Quantity::flux);
  }
  if (const YAML::Node u = root["uncertainty"]) read_uncertainty(r, u, s.uncertainty);
  if (const YAML::Node i = root["initial"]) {
    r.check_keys(i, {"ic_amp"}, "initial");
    if (i["ic_amp"]) s.ic_amp = r.number(i["ic_amp"], "ic_amp");
  }
  if (const YAML::Node sv = root["solver"]) {
    r.check_keys(sv, {"v_floor"}, "solver");
    if (sv["v_floor"]) s.v_floor = r.quantity(sv["v_floor"], "v_floor", Quantity::speed);
  }
  if (const YAML::Node a = root["attack"]) read_attack(r, a, s.attack);
  if (const YAML::Node d = root["detectors"]) read_detectors(r, d, s.detectors, base_dir);
  if (const YAML::Node t = root["threshold"]) read_threshold(r, t, s.threshold);

  s.uncertainty.seed = s.seed;
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(e.category(), fmt::format("{}: {}", origin, e.what()));
  }
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  return parse_scenario_text(read_text_file(path), path.string(), path.parent_path());
}

}  // namespace rampguard
