#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "stpuf_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliRun cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = std::string("\"") + STPUF_CLI + "\" " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

nlohmann::json error_of(const CliRun& r) { return nlohmann::json::parse(r.err)["error"]; }

}  // namespace

TEST(Cli, UnknownOptionIsArgumentError) {
  const CliRun r = cli("run --experiment fig2b --bogus");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_of(r)["category"], "argument");
  EXPECT_EQ(error_of(r)["code"], 2);
}

TEST(Cli, UnknownExperimentIsArgumentError) {
  EXPECT_EQ(cli("run --experiment fig9").code, 2);
  EXPECT_EQ(cli("").code, 2);
}

TEST(Cli, BadConfigIsConfigError) {
  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << R"({"version": 1, "seed": 3})";
  const CliRun r = cli("run --experiment fig2b --config " + bad.string() + " --out-dir " + (scratch() / "x").string());
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(error_of(r)["category"], "config");
}

TEST(Cli, UnreadableInputIsIoError) {
  const fs::path dir = scratch() / "not_a_file";
  fs::create_directories(dir);
  const CliRun r = cli("metrics --in " + dir.string());
  // CLI11 rejects directories before the engine sees them.
  EXPECT_EQ(r.code, 2);
  const fs::path junk = scratch() / "junk.txt";
  std::ofstream(junk) << "not a dataset\n";
  const CliRun m = cli("metrics --in " + junk.string() + " --report /nonexistent/dir/report.json");
  EXPECT_NE(m.code, 0);
  const CliRun w = cli("default-config --out /nonexistent/dir/cfg.json");
  EXPECT_EQ(w.code, 4);
  EXPECT_EQ(error_of(w)["category"], "io");
}

TEST(Cli, BadArrayAndGridAreArgumentErrors) {
  const std::string out = (scratch() / "sram.csv").string();
  EXPECT_EQ(cli("sram-sim --array 12by4 --out " + out).code, 2);
  EXPECT_EQ(cli("sram-sim --vdd-grid 0.6:1.0 --out " + out).code, 2);
  EXPECT_EQ(cli("sram-sim --kind 5t --out " + out).code, 2);
}

TEST(Cli, DefaultConfigMatchesShippedFile) {
  const fs::path out = scratch() / "default.json";
  ASSERT_EQ(cli("default-config --out " + out.string()).code, 0);
  auto a = nlohmann::json::parse(slurp(out));
  auto b = nlohmann::json::parse(slurp(fs::path(STPUF_SOURCE_DIR) / "config" / "default.json"));
  a.erase("provenance");
  b.erase("provenance");
  EXPECT_EQ(a, b);
}

TEST(Cli, RunWritesSummaryAndFiles) {
  const fs::path dir = scratch() / "run";
  const CliRun r = cli("run --experiment fig2b --config " + (fs::path(STPUF_SOURCE_DIR) / "config" / "default.json").string() +
                    " --out-dir " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["experiment"], "fig2b");
  EXPECT_TRUE(fs::exists(dir / "fig2b_summary.json"));
  EXPECT_TRUE(fs::exists(dir / "fig2b_sensitivity.csv"));
}

TEST(Cli, ArbiterThenMetricsPipeline) {
  const fs::path crp = scratch() / "crps.txt", report = scratch() / "report.json";
  ASSERT_EQ(cli("arbiter-sim --stages 12 --kind inv --chips 6 --challenges 40 --repeats 3 --out " + crp.string()).code, 0);
  const CliRun m = cli("metrics --in " + crp.string() + " --report " + report.string());
  ASSERT_EQ(m.code, 0) << m.err;
  const auto j = nlohmann::json::parse(slurp(report));
  EXPECT_TRUE(j.contains("intra_hd"));
  EXPECT_TRUE(j.contains("nist"));
}

TEST(Cli, SensorSimRejectsUnknownVariant) {
  const CliRun r = cli("sensor-sim --variants inv_magic --out " + (scratch() / "s.csv").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(error_of(r)["message"].get<std::string>().find("inv_magic"), std::string::npos);
}
