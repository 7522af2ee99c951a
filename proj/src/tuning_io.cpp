#include "rampguard/tuning_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "rampguard/error.hpp"

namespace rampguard {

namespace {

constexpr const char* tuning_format = "rampguard-tuning/1";
constexpr const char* certificate_format = "rampguard-certificate/1";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw Error(ErrorCategory::parse, fmt::format("{}:{}: {}", origin, line, msg));
}

double to_number(const KeyValueEntry& e, const std::string& origin) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    fail(origin, e.line, fmt::format("'{}' is not a number", e.value));
  return v;
}

void expect_unit(const KeyValueEntry& e, const std::string& origin, const std::string& unit) {
  if (e.unit != unit)
    throw Error(ErrorCategory::unit, fmt::format("{}:{}: key '{}' needs unit [{}], got [{}]",
                                                 origin, e.line, e.key, unit, e.unit));
}

bool to_flag(const KeyValueEntry& e, const std::string& origin) {
  if (e.value == "true" || e.value == "pass") return true;
  if (e.value == "false" || e.value == "fail") return false;
  fail(origin, e.line, fmt::format("'{}' is not a flag", e.value));
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string_view lambda2_name(Lambda2Mode m) {
  switch (m) {
    case Lambda2Mode::literal: return "literal";
    case Lambda2Mode::sign_flipped: return "sign_flipped";
    case Lambda2Mode::elementwise: return "elementwise";
  }
  return "literal";
}

// Applies one tuning/normalization key; false when the key is not one of them.
bool apply_tuning_key(TuningFile& out, const KeyValueEntry& e, const std::string& origin,
                      std::set<std::string>& seen) {
  const std::string& k = e.key;
  if (k == "normalized") {
    if (!to_flag(e, origin))
      fail(origin, e.line, "only normalized certifier coordinates are supported");
  } else if (k == "length_scale") {
    if (e.value != "road_length") fail(origin, e.line, "length_scale must be road_length");
  } else if (k == "time_scale") {
    const double v = to_number(e, origin);
    if (e.unit == "s") {
      out.normalization.time_scale = v;
    } else if (e.unit == "min") {
      out.normalization.time_scale = 60.0 * v;
    } else {
      throw Error(ErrorCategory::unit,
                  fmt::format("{}:{}: time_scale needs unit [s] or [min]", origin, e.line));
    }
  } else if (k == "xi") {
    expect_unit(e, origin, "1");
    out.tuning.xi = to_number(e, origin);
  } else if (k == "upsilon5" || k == "upsilon6" || k == "upsilon16") {
    expect_unit(e, origin, "1");
    const double v = to_number(e, origin);
    (k == "upsilon5" ? out.tuning.upsilon5 : k == "upsilon6" ? out.tuning.upsilon6
                                                             : out.tuning.upsilon16) = v;
  } else if (k.rfind("mu", 0) == 0 && k.size() > 2) {
    int idx = 0;
    const auto [ptr, ec] = std::from_chars(k.data() + 2, k.data() + k.size(), idx);
    if (ec != std::errc() || ptr != k.data() + k.size() || idx < 1 || idx > 16) return false;
    expect_unit(e, origin, "1");
    out.tuning.mu[static_cast<std::size_t>(idx - 1)] = to_number(e, origin);
  } else {
    return false;
  }
  seen.insert(k);
  return true;
}

void require_complete_tuning(const std::set<std::string>& seen, const std::string& origin) {
  std::vector<std::string> required = {"normalized", "time_scale", "xi", "upsilon5",
                                       "upsilon6", "upsilon16"};
  for (int i = 1; i <= 16; ++i) required.push_back(fmt::format("mu{}", i));
  for (const auto& r : required)
    if (!seen.count(r)) fail(origin, 0, fmt::format("missing key '{}'", r));
}

void check_format(const std::vector<KeyValueEntry>& entries, const std::string& origin,
                  const char* expected) {
  if (entries.empty()) fail(origin, 0, "empty document");
  if (entries.front().key != "format" || entries.front().value != expected)
    fail(origin, entries.front().line, fmt::format("first key must be 'format = {}'", expected));
}

}  // namespace

std::vector<KeyValueEntry> parse_key_values(const std::string& text, const std::string& origin) {
  std::vector<KeyValueEntry> out;
  std::set<std::string> keys;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
    KeyValueEntry e;
    e.line = line;
    e.key = trim(body.substr(0, eq));
    std::string rhs = trim(body.substr(eq + 1));
    if (!rhs.empty() && rhs.back() == ']') {
      const auto open = rhs.rfind('[');
      if (open == std::string::npos) fail(origin, line, "unbalanced unit bracket");
      e.unit = trim(rhs.substr(open + 1, rhs.size() - open - 2));
      rhs = trim(rhs.substr(0, open));
    }
    e.value = rhs;
    if (e.key.empty() || e.value.empty()) fail(origin, line, "empty key or value");
    if (!keys.insert(e.key).second) fail(origin, line, fmt::format("duplicate key '{}'", e.key));
    out.push_back(std::move(e));
  }
  return out;
}

TuningFile parse_tuning(const std::string& text, const std::string& origin) {
  const auto entries = parse_key_values(text, origin);
  check_format(entries, origin, tuning_format);
  TuningFile out;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (!apply_tuning_key(out, entries[i], origin, seen))
      fail(origin, entries[i].line, fmt::format("unknown key '{}'", entries[i].key));
  require_complete_tuning(seen, origin);
  out.tuning.validate();
  out.normalization.validate();
  return out;
}

TuningFile read_tuning(const std::filesystem::path& path) {
  return parse_tuning(read_text_file(path), path.string());
}

std::string format_tuning(const TuningParams& tuning, const Normalization& normalization) {
  std::string s;
  s += fmt::format("format = {}\n", tuning_format);
  s += "normalized = true\n";
  s += "length_scale = road_length\n";
  s += fmt::format("time_scale = {} [s]\n", num(normalization.time_scale));
  s += fmt::format("xi = {} [1]\n", num(tuning.xi));
  for (int i = 1; i <= 16; ++i) s += fmt::format("mu{} = {} [1]\n", i, num(tuning.mu_at(i)));
  s += fmt::format("upsilon5 = {} [1]\n", num(tuning.upsilon5));
  s += fmt::format("upsilon6 = {} [1]\n", num(tuning.upsilon6));
  s += fmt::format("upsilon16 = {} [1]\n", num(tuning.upsilon16));
  return s;
}

std::string format_certificate(const Certificate& cert) {
  std::string s;
  s += fmt::format("format = {}\n", certificate_format);
  std::string tuning = format_tuning(cert.tuning, cert.normalization);
  s += tuning.substr(tuning.find('\n') + 1);
  s += fmt::format("lambda2_mode = {}\n", lambda2_name(cert.lambda2_mode));
  for (const auto& [mode, k3] : cert.k3) s += fmt::format("k3.{} = {} [1]\n", mode, num(k3));
  for (const auto& p : cert.pairs) {
    const std::string pre = fmt::format("pair.{}.{}.", p.alpha, p.j);
    const ParamSet& q = p.params;
    s += fmt::format("{}k3 = {} [1]\n", pre, num(p.k3));
    s += fmt::format("{}ups7_radicand = {} [1]\n", pre, num(p.ups7_radicand));
    if (p.ups7) s += fmt::format("{}ups7 = {} [1]\n", pre, num(*p.ups7));
    const std::pair<const char*, double> fields[] = {
        {"ups8", q.ups8},   {"ups8_bar", q.ups8_bar}, {"ups9", q.ups9},
        {"ups10", q.ups10}, {"ups11", q.ups11},       {"ups12", q.ups12},
        {"ups13", q.ups13}, {"ups14", q.ups14},       {"ups15", q.ups15},
        {"ups17", q.ups17}, {"ups18", q.ups18},       {"ups_theta", q.ups_theta}};
    for (const auto& [name, v] : fields) s += fmt::format("{}{} = {} [1]\n", pre, name, num(v));
    s += fmt::format("{}es_aurs = {}\n", pre, p.es_aurs ? "pass" : "fail");
    s += fmt::format("{}lambda1 = {} {} {} {} {} [1]\n", pre, num(p.lambda1[0]),
                     num(p.lambda1[1]), num(p.lambda1[2]), num(p.lambda1[3]), num(p.lambda1[4]));
    s += fmt::format("{}robustness = {}\n", pre, p.robustness ? "pass" : "fail");
    if (p.robustness_offending >= 0)
      s += fmt::format("{}robustness_offending = {}\n", pre, p.robustness_offending);
    std::string m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m += (m.empty() ? "" : " ") + num(p.lambda2(r, c));
    s += fmt::format("{}lambda2 = {} [1]\n", pre, m);
    s += fmt::format("{}sensitivity = {}\n", pre, p.sensitivity ? "pass" : "fail");
    s += fmt::format("{}sensitivity_literal = {}\n", pre, p.sensitivity_literal ? "pass" : "fail");
    s += fmt::format("{}sensitivity_sign_flipped = {}\n", pre,
                     p.sensitivity_flipped ? "pass" : "fail");
  }
  s += fmt::format("satisfied = {} [1]\n", cert.satisfied());
  s += fmt::format("conditions = {} [1]\n", cert.total());
  s += fmt::format("feasible = {}\n", cert.feasible ? "true" : "false");
  s += fmt::format("feasible_literal = {}\n", cert.feasible_literal ? "true" : "false");
  s += fmt::format("feasible_sign_flipped = {}\n", cert.feasible_sign_flipped ? "true" : "false");
  return s;
}

CertificateFile parse_certificate(const std::string& text, const std::string& origin) {
  const auto entries = parse_key_values(text, origin);
  check_format(entries, origin, certificate_format);
  CertificateFile out;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const KeyValueEntry& e = entries[i];
    if (apply_tuning_key(out.tuning, e, origin, seen)) continue;
    if (e.key == "lambda2_mode") {
      if (e.value == "literal") out.lambda2_mode = Lambda2Mode::literal;
      else if (e.value == "sign_flipped") out.lambda2_mode = Lambda2Mode::sign_flipped;
      else if (e.value == "elementwise") out.lambda2_mode = Lambda2Mode::elementwise;
      else fail(origin, e.line, fmt::format("unknown lambda2_mode '{}'", e.value));
    } else if (e.key.rfind("k3.", 0) == 0) {
      int mode = 0;
      const std::string id = e.key.substr(3);
      const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), mode);
      if (ec != std::errc() || ptr != id.data() + id.size())
        fail(origin, e.line, fmt::format("bad mode id in '{}'", e.key));
      expect_unit(e, origin, "1");
      out.k3[mode] = to_number(e, origin);
    } else if (e.key == "feasible") {
      out.feasible = to_flag(e, origin);
    } else if (e.key == "feasible_literal") {
      out.feasible_literal = to_flag(e, origin);
    } else if (e.key == "feasible_sign_flipped") {
      out.feasible_sign_flipped = to_flag(e, origin);
    } else if (e.key.rfind("pair.", 0) == 0 || e.key == "satisfied" || e.key == "conditions") {
      // per-pair diagnostics are informational
    } else {
      fail(origin, e.line, fmt::format("unknown key '{}'", e.key));
    }
  }
  require_complete_tuning(seen, origin);
  return out;
}

CertificateFile read_certificate(const std::filesystem::path& path) {
  return parse_certificate(read_text_file(path), path.string());
}

double certified_k3(const CertificateFile& cert, int mode) {
  const auto it = cert.k3.find(mode);
  if (it == cert.k3.end())
    throw Error(ErrorCategory::config, fmt::format("certificate has no k3 for mode {}", mode));
  return it->second;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::io, fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(ErrorCategory::io, fmt::format("write failed for '{}'", path.string()));
}

}  // namespace rampguard
