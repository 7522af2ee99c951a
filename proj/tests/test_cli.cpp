#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "rampguard/tuning_io.hpp"
#include "support/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "rampguard_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + RAMPGUARD_CLI + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = rampguard::read_text_file(out);
  r.err = rampguard::read_text_file(err);
  return r;
}

std::string scenario(const char* name) { return "\"" + harness::scenario_path(name).string() + "\""; }

}  // namespace

TEST(Cli, RunWithFixedThreshold) {
  const Result r = cli("run " + scenario("case1_dos") + " --threshold 0.05");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("scenario = case1_dos"), std::string::npos);
  EXPECT_NE(r.out.find("attack_onset = 250 s"), std::string::npos);
}

TEST(Cli, SeedOverrideChangesTheRun) {
  const Result a = cli("run " + scenario("nominal") + " --threshold 0.05 --seed 2");
  const Result b = cli("run " + scenario("nominal") + " --threshold 0.05 --seed 2");
  const Result c = cli("run " + scenario("nominal") + " --threshold 0.05 --seed 3");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, ExportWritesRequestedFormats) {
  const fs::path dir = scratch() / "export";
  const Result r = cli("export " + scenario("case2_fdi") + " --threshold 0.05 --format csv -o \"" +
                       dir.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "control.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_FALSE(fs::exists(dir / "density.svg"));
}

TEST(Cli, CertifyPrintsCertificate) {
  const Result r = cli("certify " + scenario("nominal") + " --time-scale 100");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("format = rampguard-certificate/1", 0), 0u);
  EXPECT_NE(r.err.find("conditions satisfied"), std::string::npos);
}

TEST(Cli, ErrorsAreCategorized) {
  struct Case {
    std::string args;
    int code;
    const char* category;
  };
  const fs::path bad = scratch() / "bad.yaml";
  rampguard::write_text_file(bad, "format: rampguard-scenario/1\nunits: [\n");
  const Case cases[] = {
      {"", 2, "usage"},
      {"fly", 2, "usage"},
      {"run", 2, "usage"},
      {"run " + scenario("nominal") + " --threshold 0.05 --format pdf", 2, "usage"},
      {"run \"" + (scratch() / "missing.yaml").string() + "\" --threshold 0.05", 10, "io"},
      {"run \"" + bad.string() + "\" --threshold 0.05", 3, "parse"},
      {"calibrate " + scenario("nominal") + " --runs 1", 9, "calibration"},
  };
  for (const auto& c : cases) {
    const Result r = cli(c.args);
    EXPECT_EQ(r.code, c.code) << c.args << "\n" << r.err;
    EXPECT_NE(r.err.find(std::string("error category=") + c.category), std::string::npos)
        << c.args << "\n" << r.err;
  }
}
