#include "rampguard/export.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "rampguard/error.hpp"
#include "rampguard/tuning_io.hpp"

namespace rampguard {

namespace {

std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.10g}", v);
}

class CsvWriter {
 public:
  void header(const std::vector<std::pair<std::string, std::string>>& cols) {
    std::vector<std::string> cells;
    for (const auto& [name, unit] : cols) cells.push_back(fmt::format("{} [{}]", name, unit));
    row(cells);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cell(cells[i]);
    }
    out_ << "\r\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string opt(const std::optional<double>& v) { return v ? num(*v) : ""; }

// --- SVG helpers -----------------------------------------------------------

struct Frame {
  double left = 70, top = 30, width = 640, height = 300;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

std::pair<double, double> padded_range(double lo, double hi) {
  if (!(lo <= hi)) return {0.0, 1.0};
  if (hi - lo < 1e-12) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void axes(std::ostringstream& s, const Frame& f, const std::string& title,
          const std::string& xlabel, const std::string& ylabel) {
  s << fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
      f.left, f.top, f.width, f.height);
  s << fmt::format("<text x=\"{}\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                   f.left + f.width / 2, title);
  s << fmt::format(
      "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
      f.left + f.width / 2, f.top + f.height + 36, xlabel);
  s << fmt::format(
      "<text x=\"16\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 16 {})\">{}</text>\n",
      f.top + f.height / 2, f.top + f.height / 2, ylabel);
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s << fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"middle\">{:.4g}</text>\n",
        f.px(xv), f.top + f.height + 14, xv);
    s << fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"10\" text-anchor=\"end\">{:.4g}</text>\n",
        f.left - 4, f.py(yv) + 3, yv);
  }
}

void polyline(std::ostringstream& s, const Frame& f, const std::vector<double>& x,
              const std::vector<double>& y, const std::string& colour, const std::string& extra = "") {
  if (x.empty()) return;
  s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\"" << extra
    << " points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s << ' ';
    s << fmt::format("{:.2f},{:.2f}", f.px(x[i]), f.py(std::clamp(y[i], f.y0, f.y1)));
  }
  s << "\"/>\n";
}

void legend(std::ostringstream& s, const Frame& f, int row, const std::string& colour,
            const std::string& label) {
  const double y = f.top + 12 + 14 * row;
  const double x = f.left + f.width + 10;
  s << fmt::format(
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", x,
      y - 4, x + 16, y - 4, colour);
  s << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n", x + 20, y, label);
}

std::string svg_open(double w, double h) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" "
      "fill=\"white\"/>\n",
      w, h, w, h);
}

// blue (low) -> yellow -> red (high)
std::string heat(double u) {
  u = std::clamp(u, 0.0, 1.0);
  double r, g, b;
  if (u < 0.5) {
    const double k = u / 0.5;
    r = 40 + k * (250 - 40);
    g = 70 + k * (220 - 70);
    b = 200 - k * (200 - 60);
  } else {
    const double k = (u - 0.5) / 0.5;
    r = 250 - k * (250 - 200);
    g = 220 - k * 200;
    b = 60 - k * 40;
  }
  return fmt::format("#{:02x}{:02x}{:02x}", static_cast<int>(std::lround(r)),
                     static_cast<int>(std::lround(g)), static_cast<int>(std::lround(b)));
}

// dashed vertical line at the attack onset, x axis is time
void onset_marker(std::ostringstream& s, const Frame& f, const RunArtifacts& a) {
  const auto onset = a.summary.attack_onset;
  if (!onset || *onset < f.x0 || *onset > f.x1) return;
  s << fmt::format(
      "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"darkred\" "
      "stroke-dasharray=\"5,3\"/>\n",
      f.px(*onset), f.top, f.top + f.height);
}

}  // namespace

std::set<ExportFormat> parse_formats(const std::string& list) {
  std::set<ExportFormat> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "csv")
      out.insert(ExportFormat::csv);
    else if (item == "svg")
      out.insert(ExportFormat::svg);
    else
      throw Error(ErrorCategory::usage, fmt::format("unknown export format '{}'", item));
  }
  if (out.empty()) throw Error(ErrorCategory::usage, "no export format given");
  return out;
}

std::string control_csv(const RunArtifacts& a) {
  CsvWriter w;
  w.header({{"t", "s"},
            {"alpha", "1"},
            {"sigma", "1"},
            {"sigma_tilde", "1"},
            {"u_sigma", "veh/s"},
            {"u_sigma_tilde", "veh/s"},
            {"delta", "veh/s"},
            {"q_s", "veh/s"},
            {"y", "veh/s"}});
  const auto& c = a.control;
  for (std::size_t k = 0; k < c.t.size(); ++k)
    w.row({num(c.t[k]), std::to_string(c.alpha[k]), std::to_string(c.sigma[k]),
           std::to_string(c.sigma_tilde[k]), num(c.u_sigma[k]), num(c.u_sigma_tilde[k]),
           num(c.delta[k]), num(c.q_s[k]), num(c.y[k])});
  return w.str();
}

std::string residual_csv(const RunArtifacts& a) {
  CsvWriter w;
  const auto& r = a.residual;
  std::vector<std::pair<std::string, std::string>> cols{{"t", "s"}};
  for (int j : r.detector_modes) cols.push_back({fmt::format("zeta_{}", j), "veh/s"});
  cols.push_back({"r", "veh/s"});
  cols.push_back({"threshold", "veh/s"});
  cols.push_back({"alarm", "1"});
  w.header(cols);
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    std::vector<std::string> row{num(r.t[k])};
    for (const auto& z : r.zeta) row.push_back(num(z[k]));
    row.push_back(num(r.r[k]));
    row.push_back(num(r.threshold[k]));
    row.push_back(std::to_string(r.alarm[k]));
    w.row(row);
  }
  return w.str();
}

std::string field_csv(const RunArtifacts& a) {
  CsvWriter w;
  w.header({{"t", "s"}, {"x", "m"}, {"q", "veh/s"}, {"v", "m/s"}, {"rho", "veh/m"}});
  const auto& s = a.state;
  for (std::size_t k = 0; k < s.t.size(); ++k)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      w.row({num(s.t[k]), num(s.x[i]), num(s.q[k][i]), num(s.v[k][i]), num(s.rho[k][i])});
  return w.str();
}

std::string summary_csv(const RunArtifacts& a) {
  const RunSummary& m = a.summary;
  std::ostringstream out;
  out << "name,value,unit\r\n";
  auto line = [&](const std::string& name, const std::string& value, const std::string& unit) {
    out << cell(name) << ',' << cell(value) << ',' << cell(unit) << "\r\n";
  };
  line("scenario", a.scenario, "");
  line("attack_onset", opt(m.attack_onset), "s");
  line("first_alarm", opt(m.first_alarm_t), "s");
  line("detection_latency",
       m.detection_latency ? num(*m.detection_latency) : (m.attack_onset ? "missed" : ""), "s");
  line("alarms", std::to_string(m.alarms), "1");
  line("false_alarms", std::to_string(m.false_alarms), "1");
  line("threshold", num(m.threshold), "veh/s");
  line("peak_density", num(m.peak_density), "veh/m");
  line("peak_density_x", num(m.peak_density_x), "m");
  line("peak_density_t", num(m.peak_density_t), "s");
  line("peak_density_before_onset", num(m.peak_density_before_onset), "veh/m");
  line("peak_density_after_onset", num(m.peak_density_after_onset), "veh/m");
  line("mean_outlet_flux_before_onset", num(m.mean_outlet_flux_before_onset), "veh/s");
  line("mean_outlet_flux_after_onset", num(m.mean_outlet_flux_after_onset), "veh/s");
  for (std::size_t j = 0; j < a.k3.size() && j < a.residual.detector_modes.size(); ++j)
    line(fmt::format("k3_{}", a.residual.detector_modes[j]), num(a.k3[j]), "1");
  return out.str();
}

std::string density_heatmap_svg(const RunArtifacts& a) {
  const auto& s = a.state;
  Frame f;
  f.width = 640;
  f.height = 320;
  f.x0 = s.t.empty() ? 0.0 : s.t.front();
  f.x1 = s.t.empty() ? 1.0 : std::max(s.t.back(), f.x0 + 1e-9);
  f.y0 = s.x.empty() ? 0.0 : s.x.front();
  f.y1 = s.x.empty() ? 1.0 : std::max(s.x.back(), f.y0 + 1e-9);

  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& row : s.rho)
    for (double r : row) {
      if (first) lo = hi = r, first = false;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  if (hi - lo < 1e-12) hi = lo + 1e-12;

  std::ostringstream out;
  out << svg_open(f.left + f.width + 110, f.top + f.height + 50);
  // cap the raster so the file stays small on long runs
  const std::size_t max_cols = 300, max_rows = 60;
  const std::size_t nt = s.t.size(), nx = s.x.size();
  const std::size_t ct = nt ? std::max<std::size_t>(1, (nt + max_cols - 1) / max_cols) : 1;
  const std::size_t cx = nx ? std::max<std::size_t>(1, (nx + max_rows - 1) / max_rows) : 1;
  const double cw = nt ? f.width / std::ceil(static_cast<double>(nt) / ct) : 0.0;
  const double ch = nx ? f.height / std::ceil(static_cast<double>(nx) / cx) : 0.0;
  for (std::size_t k = 0, col = 0; k < nt; k += ct, ++col)
    for (std::size_t i = 0, rowi = 0; i < nx; i += cx, ++rowi) {
      double acc = 0.0;
      for (std::size_t kk = k; kk < std::min(nt, k + ct); ++kk)
        for (std::size_t ii = i; ii < std::min(nx, i + cx); ++ii) {
          acc = std::max(acc, s.rho[kk][ii]);
        }
      out << fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
          f.left + col * cw, f.top + f.height - (rowi + 1) * ch, cw + 0.3, ch + 0.3,
          heat((acc - lo) / (hi - lo)));
    }
  axes(out, f, fmt::format("density {}", a.scenario), "t [s]", "x [m]");
  onset_marker(out, f, a);
  for (int i = 0; i <= 10; ++i) {
    const double u = i / 10.0;
    out << fmt::format(
        "<rect x=\"{}\" y=\"{:.2f}\" width=\"14\" height=\"{:.2f}\" fill=\"{}\"/>\n",
        f.left + f.width + 12, f.top + f.height - (i + 1) * f.height / 11, f.height / 11 + 0.3,
        heat(u));
  }
  out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">{:.4g}</text>\n",
                     f.left + f.width + 30, f.top + 8, hi);
  out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"10\">{:.4g} veh/m</text>\n",
                     f.left + f.width + 30, f.top + f.height, lo);
  out << "</svg>\n";
  return out.str();
}

std::string control_plot_svg(const RunArtifacts& a) {
  const auto& c = a.control;
  Frame f;
  f.x0 = c.t.empty() ? 0.0 : c.t.front();
  f.x1 = c.t.empty() ? 1.0 : std::max(c.t.back(), f.x0 + 1e-9);
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    lo = std::min({lo, c.u_sigma[k], c.u_sigma_tilde[k]});
    hi = std::max({hi, c.u_sigma[k], c.u_sigma_tilde[k]});
  }
  std::tie(f.y0, f.y1) = padded_range(lo, hi);
  std::ostringstream out;
  out << svg_open(f.left + f.width + 140, f.top + f.height + 50);
  axes(out, f, fmt::format("ramp control {}", a.scenario), "t [s]", "U [veh/s]");
  polyline(out, f, c.t, c.u_sigma, "steelblue");
  polyline(out, f, c.t, c.u_sigma_tilde, "crimson", " stroke-dasharray=\"4,2\"");
  onset_marker(out, f, a);
  legend(out, f, 0, "steelblue", "U_sigma");
  legend(out, f, 1, "crimson", "U_sigma_tilde");
  out << "</svg>\n";
  return out.str();
}

std::string residual_plot_svg(const RunArtifacts& a) {
  const auto& r = a.residual;
  Frame f;
  f.x0 = r.t.empty() ? 0.0 : r.t.front();
  f.x1 = r.t.empty() ? 1.0 : std::max(r.t.back(), f.x0 + 1e-9);
  double hi = a.summary.threshold;
  for (double v : r.r)
    if (std::isfinite(v)) hi = std::max(hi, v);
  std::tie(f.y0, f.y1) = padded_range(0.0, hi);
  f.y0 = 0.0;
  std::ostringstream out;
  out << svg_open(f.left + f.width + 140, f.top + f.height + 50);
  axes(out, f, fmt::format("residual {}", a.scenario), "t [s]", "r [veh/s]");
  polyline(out, f, r.t, r.r, "black");
  if (!r.t.empty() && std::isfinite(a.summary.threshold))
    polyline(out, f, {f.x0, f.x1}, {a.summary.threshold, a.summary.threshold}, "orange",
             " stroke-dasharray=\"6,3\"");
  onset_marker(out, f, a);
  for (std::size_t k = 0; k < r.alarm.size(); ++k)
    if (r.alarm[k])
      out << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"red\"/>\n",
                         f.px(r.t[k]), f.py(std::min(r.r[k], f.y1)));
  legend(out, f, 0, "black", "r");
  legend(out, f, 1, "orange", "J");
  legend(out, f, 2, "red", "alarm");
  out << "</svg>\n";
  return out.str();
}

std::vector<std::filesystem::path> export_artifacts(const RunArtifacts& a,
                                                    const std::filesystem::path& dir,
                                                    const std::set<ExportFormat>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorCategory::io,
                fmt::format("cannot create directory {}: {}", dir.string(), ec.message()));
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    const auto p = dir / name;
    write_text_file(p, text);
    written.push_back(p);
  };
  if (formats.count(ExportFormat::csv)) {
    put("control.csv", control_csv(a));
    put("residual.csv", residual_csv(a));
    put("field.csv", field_csv(a));
    put("summary.csv", summary_csv(a));
  }
  if (formats.count(ExportFormat::svg)) {
    put("density.svg", density_heatmap_svg(a));
    put("control.svg", control_plot_svg(a));
    put("residual.svg", residual_plot_svg(a));
  }
  return written;
}

}  // namespace rampguard
