#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rampguard/lmi_certifier.hpp"

namespace rampguard {

// Line-oriented `key = value [unit]` text. `#` starts a comment, dimensionless
// values carry the unit `[1]`, flags and words carry no unit.

struct KeyValueEntry {
  std::string key;
  std::string value;
  std::string unit;
  int line = 0;
};

std::vector<KeyValueEntry> parse_key_values(const std::string& text, const std::string& origin);

struct TuningFile {
  TuningParams tuning;
  Normalization normalization;
};

TuningFile parse_tuning(const std::string& text, const std::string& origin = "<tuning>");
TuningFile read_tuning(const std::filesystem::path& path);
std::string format_tuning(const TuningParams& tuning, const Normalization& normalization);

struct CertificateFile {
  TuningFile tuning;
  Lambda2Mode lambda2_mode = Lambda2Mode::literal;
  std::map<int, double> k3;
  bool feasible = false;
  bool feasible_literal = false;
  bool feasible_sign_flipped = false;
};

std::string format_certificate(const Certificate& cert);
CertificateFile parse_certificate(const std::string& text,
                                  const std::string& origin = "<certificate>");
CertificateFile read_certificate(const std::filesystem::path& path);
double certified_k3(const CertificateFile& cert, int mode);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rampguard
