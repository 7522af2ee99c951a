#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rampguard/error.hpp"
#include "rampguard/export.hpp"
#include "rampguard/lmi_certifier.hpp"
#include "rampguard/scenario_io.hpp"
#include "rampguard/simulation.hpp"
#include "rampguard/tuning_io.hpp"

namespace fs = std::filesystem;
using namespace rampguard;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return 2;
    case ErrorCategory::parse: return 3;
    case ErrorCategory::unit: return 4;
    case ErrorCategory::config: return 5;
    case ErrorCategory::domain: return 6;
    case ErrorCategory::cfl: return 7;
    case ErrorCategory::breakdown: return 8;
    case ErrorCategory::calibration: return 9;
    case ErrorCategory::io: return 10;
  }
  return 1;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

int report(ErrorCategory c, const std::string& message) {
  std::cerr << fmt::format("error category={} message={}\n", category_name(c), quoted(message));
  return exit_code(c);
}

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{:.6g}", *v) : "none"; }

void print_summary(const RunArtifacts& a) {
  const RunSummary& m = a.summary;
  fmt::print("scenario = {}\n", a.scenario);
  fmt::print("threshold = {:.6g} veh/s\n", m.threshold);
  fmt::print("alarms = {}\n", m.alarms);
  fmt::print("false_alarms = {}\n", m.false_alarms);
  fmt::print("attack_onset = {} s\n", opt(m.attack_onset));
  fmt::print("first_alarm = {} s\n", opt(m.first_alarm_t));
  fmt::print("detection_latency = {}\n",
             m.detection_latency ? fmt::format("{:.6g} s", *m.detection_latency)
                                 : (m.attack_onset ? "missed" : "none"));
  fmt::print("peak_density = {:.6g} veh/m at x = {:.6g} m, t = {:.6g} s\n", m.peak_density,
             m.peak_density_x, m.peak_density_t);
  if (m.attack_onset) {
    fmt::print("peak_density_before_onset = {:.6g} veh/m\n", m.peak_density_before_onset);
    fmt::print("peak_density_after_onset = {:.6g} veh/m\n", m.peak_density_after_onset);
    fmt::print("mean_outlet_flux_before_onset = {:.6g} veh/s\n",
               m.mean_outlet_flux_before_onset);
    fmt::print("mean_outlet_flux_after_onset = {:.6g} veh/s\n", m.mean_outlet_flux_after_onset);
  }
}

Scenario load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  Scenario s = parse_scenario(path);
  if (seed) s = s.with_seed(*seed);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switching-attack detection for ramp-metered freeway traffic"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string formats = "csv";
  std::optional<double> threshold;

  auto* run = app.add_subcommand("run", "Simulate a scenario and print its summary");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("-o,--out", out_dir, "Write artifacts to this directory");
  run->add_option("--format", formats, "Comma-separated export formats (csv, svg)");
  run->add_option("--threshold", threshold, "Fixed threshold in veh/s, skips calibration");

  int runs = 0;
  std::optional<double> far;
  auto* calibrate = app.add_subcommand("calibrate", "Monte Carlo threshold calibration");
  calibrate->add_option("scenario", scenario_path, "Scenario file")->required();
  calibrate->add_option("--seed", seed, "Override the scenario seed");
  calibrate->add_option("--runs", runs, "Number of nominal runs (default from scenario)");
  calibrate->add_option("--far", far, "Target false-alarm rate (default from scenario)");
  calibrate->add_option("-o,--out", out_dir, "Write calibration.txt to this directory");

  std::string tuning_path;
  std::optional<double> time_scale;
  std::string lambda2 = "literal";
  std::string k3_policy = "half_bound";
  int search_budget = 0;
  auto* certify_cmd = app.add_subcommand("certify", "Check the detector design conditions");
  certify_cmd->add_option("scenario", scenario_path, "Scenario file (modes and road)")->required();
  certify_cmd->add_option("--tuning", tuning_path, "Tuning file (defaults when absent)");
  certify_cmd->add_option("--time-scale", time_scale, "Normalization time scale in s");
  certify_cmd->add_option("--lambda2", lambda2, "literal, sign_flipped or elementwise")
      ->check(CLI::IsMember({"literal", "sign_flipped", "elementwise"}));
  certify_cmd->add_option("--k3", k3_policy, "half_bound, zero or deadbeat")
      ->check(CLI::IsMember({"half_bound", "zero", "deadbeat"}));
  certify_cmd->add_option("--search", search_budget, "Search the tuning with this many evaluations");
  certify_cmd->add_option("--seed", seed, "Seed of the tuning search");
  certify_cmd->add_option("-o,--out", out_dir, "Certificate file to write");

  auto* export_cmd = app.add_subcommand("export", "Simulate a scenario and write CSV / SVG artifacts");
  export_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  export_cmd->add_option("-o,--out", out_dir, "Output directory")->required();
  export_cmd->add_option("--seed", seed, "Override the scenario seed");
  export_cmd->add_option("--format", formats, "Comma-separated export formats (csv, svg)")
      ->default_val("csv,svg");
  export_cmd->add_option("--threshold", threshold, "Fixed threshold in veh/s, skips calibration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorCategory::usage, e.what());
  }

  try {
    if (*run || *export_cmd) {
      const Scenario s = load(scenario_path, seed);
      const auto fmts = parse_formats(formats);
      RunOptions options;
      options.threshold = threshold;
      const RunArtifacts a = run_scenario(s, options);
      print_summary(a);
      if (!out_dir.empty())
        for (const auto& p : export_artifacts(a, out_dir, fmts))
          fmt::print("wrote {}\n", p.string());
    } else if (*calibrate) {
      const Scenario s = load(scenario_path, seed);
      const int n = runs > 0 ? runs : s.threshold.calibration_runs;
      const double target = far.value_or(s.threshold.target_far);
      const CalibrationReport rep = monte_carlo_calibrate(s, n, target);
      const std::string text = fmt::format(
          "threshold = {:.17g} [veh/s]\ntarget_far = {:.17g} [1]\nexceedance_rate = {:.17g} "
          "[1]\nbinomial_halfwidth = {:.17g} [1]\nsamples = {}\nruns = {}\nfirst_seed = {}\n",
          rep.calibration.threshold, target, rep.calibration.exceedance_rate,
          rep.binomial_halfwidth, rep.calibration.samples, rep.runs,
          rep.seeds.empty() ? 0 : rep.seeds.front());
      std::cout << text;
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file(fs::path(out_dir) / "calibration.txt", text);
      }
    } else if (*certify_cmd) {
      const Scenario s = parse_scenario(scenario_path);
      TuningFile tf{TuningParams::defaults(), Normalization{}};
      if (!tuning_path.empty()) tf = read_tuning(tuning_path);
      if (time_scale) tf.normalization.time_scale = *time_scale;
      CertifyOptions options;
      options.normalization = tf.normalization;
      options.gain_form = s.detectors.gain_form;
      options.lambda = s.detectors.lambda;
      options.check.lambda2_mode = lambda2 == "sign_flipped"  ? Lambda2Mode::sign_flipped
                                   : lambda2 == "elementwise" ? Lambda2Mode::elementwise
                                                              : Lambda2Mode::literal;
      options.k3_policy = k3_policy == "zero"       ? K3Policy::zero
                          : k3_policy == "deadbeat" ? K3Policy::deadbeat
                                                    : K3Policy::half_bound;
      const auto modes = s.effective_modes();
      Certificate cert;
      if (search_budget > 0) {
        cert = search_tuning(modes, modes, s.global, SearchBounds{}, search_budget,
                             seed.value_or(1), options, tf.tuning)
                   .best;
      } else {
        cert = certify(modes, s.global, tf.tuning, options);
      }
      const std::string text = format_certificate(cert);
      if (out_dir.empty())
        std::cout << text;
      else
        write_text_file(out_dir, text);
      fmt::print(stderr, "conditions satisfied: {} of {}, feasible = {}\n", cert.satisfied(),
                 cert.total(), cert.feasible);
    }
  } catch (const Error& e) {
    return report(e.category(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report(ErrorCategory::io, e.what());
  }
  return 0;
}
