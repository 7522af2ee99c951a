#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "rampguard/error.hpp"
#include "rampguard/tuning_io.hpp"
#include "support/oracles.hpp"

using namespace rampguard;

namespace {

ErrorCategory category_of(const std::string& text) {
  try {
    parse_tuning(text);
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "accepted:\n" << text;
  return ErrorCategory::usage;
}

// Replaces the whole line that starts with `key =`; an empty `line` drops it.
std::string set_line(const std::string& text, const std::string& key, const std::string& line) {
  const std::string prefix = key + " =";
  const auto at = text.find(prefix);
  EXPECT_NE(at, std::string::npos) << key;
  const auto end = text.find('\n', at);
  std::string out = text.substr(0, at) + line;
  return line.empty() ? out + text.substr(end + 1) : out + text.substr(end);
}

}  // namespace

TEST(TuningIo, KeyValueSyntax) {
  const auto e = parse_key_values("# comment\n a = 1.5 [s]  # trailing\nflag = true\n", "x");
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].key, "a");
  EXPECT_EQ(e[0].value, "1.5");
  EXPECT_EQ(e[0].unit, "s");
  EXPECT_EQ(e[0].line, 2);
  EXPECT_EQ(e[1].unit, "");
  EXPECT_THROW(parse_key_values("a = 1\na = 2\n", "x"), Error);
  EXPECT_THROW(parse_key_values("novalue\n", "x"), Error);
}

TEST(TuningIo, RoundTrip) {
  const TuningParams t = oracle::table_tuning();
  const std::string text = format_tuning(t, Normalization{100.0});
  const TuningFile back = parse_tuning(text);
  EXPECT_EQ(back.tuning.mu, t.mu);
  EXPECT_EQ(back.tuning.xi, t.xi);
  EXPECT_EQ(back.tuning.upsilon5, t.upsilon5);
  EXPECT_EQ(back.tuning.upsilon6, t.upsilon6);
  EXPECT_EQ(back.tuning.upsilon16, t.upsilon16);
  EXPECT_EQ(back.normalization.time_scale, 100.0);
  EXPECT_EQ(format_tuning(back.tuning, back.normalization), text);
}

TEST(TuningIo, TimeScaleInMinutes) {
  const std::string text =
      set_line(format_tuning(TuningParams::defaults(), Normalization{}), "time_scale",
               "time_scale = 2 [min]");
  EXPECT_EQ(parse_tuning(text).normalization.time_scale, 120.0);
}

TEST(TuningIo, Errors) {
  const std::string good = format_tuning(TuningParams::defaults(), Normalization{});
  EXPECT_EQ(category_of(""), ErrorCategory::parse);
  EXPECT_EQ(category_of(set_line(good, "mu3", "mu17 = 1 [1]")), ErrorCategory::parse);
  EXPECT_EQ(category_of(set_line(good, "xi", "zeta = 1 [1]")), ErrorCategory::parse);
  EXPECT_EQ(category_of(set_line(good, "time_scale", "time_scale = 1 [h]")), ErrorCategory::unit);
  EXPECT_EQ(category_of(set_line(good, "upsilon5", "upsilon5 = 1 [s]")), ErrorCategory::unit);
  EXPECT_EQ(category_of(set_line(good, "mu2", "")), ErrorCategory::parse);
  EXPECT_EQ(category_of(set_line(good, "mu2", "mu2 = fast [1]")), ErrorCategory::parse);
  EXPECT_EQ(category_of(set_line(good, "mu2", "mu2 = -0.01 [1]")), ErrorCategory::config);
  EXPECT_EQ(category_of(good + "mu2 = 1 [1]\n"), ErrorCategory::parse);
}

TEST(TuningIo, ErrorsCarryLineReference) {
  const std::string good = format_tuning(TuningParams::defaults(), Normalization{});
  try {
    parse_tuning(set_line(good, "xi", "zeta = 1 [1]"), "tune.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("tune.txt:5:"), std::string::npos) << e.what();
  }
}

TEST(TuningIo, CertificateRoundTrip) {
  CertifyOptions o;
  o.normalization.time_scale = 100.0;
  const Certificate cert = certify(reference_modes(), GlobalParams{}, TuningParams::defaults(), o);
  const std::string text = format_certificate(cert);
  const CertificateFile f = parse_certificate(text);
  EXPECT_EQ(f.feasible, cert.feasible);
  EXPECT_EQ(f.feasible_literal, cert.feasible_literal);
  EXPECT_EQ(f.feasible_sign_flipped, cert.feasible_sign_flipped);
  EXPECT_EQ(f.tuning.normalization.time_scale, 100.0);
  for (const auto& [mode, k3] : cert.k3) EXPECT_EQ(certified_k3(f, mode), k3);
  EXPECT_THROW(certified_k3(f, 7), Error);
}

TEST(TuningIo, FilesRoundTripAndReportIoErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "rampguard_tuning_io";
  std::filesystem::create_directories(dir);
  const std::string text = format_tuning(oracle::table_tuning(), Normalization{100.0});
  write_text_file(dir / "t.txt", text);
  EXPECT_EQ(read_text_file(dir / "t.txt"), text);
  EXPECT_EQ(read_tuning(dir / "t.txt").tuning.mu, oracle::table_tuning().mu);
  try {
    read_tuning(dir / "missing.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::io);
  }
  std::filesystem::remove_all(dir);
}
