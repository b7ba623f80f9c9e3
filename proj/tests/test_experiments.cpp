#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "stpuf/config.hpp"
#include "stpuf/error.hpp"
#include "stpuf/experiments.hpp"

using namespace stpuf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig reduced() {
  ExperimentConfig c = default_config();
  c.variation.sample_count = 60;
  c.arbiter.chips = 20;
  c.arbiter.fig5_challenges = 64;
  c.arbiter.hd_challenges = 32;
  c.arbiter.hd_repeats = 4;
  c.sram.rows = 16;
  c.sram.cols = 16;
  c.sram.cycles = 10;
  c.nist.reference_trials = 3;
  c.nist.reference_bits = 20000;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json summary_of(const fs::path& dir, const std::string& name) { return json::parse(slurp(dir / (name + "_summary.json"))); }

std::vector<double> column(const CsvTable& t, const std::string& name) {
  std::vector<double> out;
  const auto i = t.column(name);
  for (const auto& r : t.rows) out.push_back(std::stod(r[i]));
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

class Experiments : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "stpuf_experiments_test";
    fs::remove_all(root_);
    for (const auto& n : experiment_names()) {
      run_experiment(n, reduced(), (root_ / "a").string());
      run_experiment(n, reduced(), (root_ / "b").string());
    }
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static fs::path dir() { return root_ / "a"; }

  static fs::path root_;
};

fs::path Experiments::root_;

}  // namespace

TEST_F(Experiments, RerunIsByteIdentical) {
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(root_ / "a")) {
    const fs::path twin = root_ / "b" / e.path().filename();
    ASSERT_TRUE(fs::exists(twin)) << twin;
    EXPECT_EQ(slurp(e.path()), slurp(twin)) << e.path().filename();
    ++files;
  }
  EXPECT_GT(files, 20u);
}

TEST_F(Experiments, CsvFilesCarryProvenanceHeader) {
  const std::string want = "# experiment=fig6e config_hash=" + config_hash(reduced()) + " seed=20140601";
  const CsvTable t = read_csv((dir() / "fig6e_faults.csv").string());
  ASSERT_FALSE(t.comments.empty());
  EXPECT_EQ(t.comments.front(), want);
  EXPECT_EQ(summary_of(dir(), "fig6e")["config_hash"], config_hash(reduced()));
}

TEST_F(Experiments, Fig1SummaryMatchesRows) {
  const json s = summary_of(dir(), "fig1");
  const CsvTable t = read_csv((dir() / "fig1_delay_differences.csv").string());
  ASSERT_EQ(t.rows.size(), 60u);
  const auto pre = column(t, "pre_s");
  const auto post = column(t, "post_s");
  EXPECT_NEAR(s["pre"]["mean"].get<double>(), mean(pre), 1e-9 * std::abs(mean(pre)) + 1e-24);
  EXPECT_NEAR(s["pre"]["std"].get<double>(), sample_sd(pre), 1e-9 * sample_sd(pre));
  EXPECT_NEAR(s["post"]["std"].get<double>(), sample_sd(post), 1e-9 * sample_sd(post) + 1e-24);
  EXPECT_LT(sample_sd(post), sample_sd(pre));
  int negative = 0;
  for (double p : post) negative += p < 0;
  EXPECT_EQ(s["negative_post"].get<int>(), negative);

  const CsvTable h = read_csv((dir() / "fig1_pre_histogram.csv").string());
  int total = 0;
  for (double c : column(h, "count")) total += static_cast<int>(c);
  EXPECT_EQ(total, 60);
}

TEST_F(Experiments, Fig2bEndpointMatchesLastRow) {
  const json s = summary_of(dir(), "fig2b");
  const CsvTable t = read_csv((dir() / "fig2b_sensitivity.csv").string());
  const auto sens = column(t, "sensitivity");
  EXPECT_EQ(s["endpoint_sensitivity"].get<double>(), sens.back());
  EXPECT_EQ(column(t, "delta_vth_v").back(), reduced().device.sensitivity_sweep_max);
}

TEST_F(Experiments, Fig4ErrorRatesMatchReadings) {
  for (const std::string fig : {"fig4a", "fig4b", "fig4c"}) {
    const json s = summary_of(dir(), fig);
    for (const auto& design : s["designs"]) {
      const std::string v = design["variant"];
      const CsvTable t = read_csv((dir() / (fig + "_" + v + "_readings.csv")).string());
      std::map<double, std::pair<int, int>> counts;  // usage -> (missed, total)
      const auto u = t.column("usage_s"), k = t.column("classified"), d = t.column("tick_delta");
      for (const auto& r : t.rows) {
        const double usage = std::stod(r[u]);
        const bool flagged = r[k] == "1";
        EXPECT_EQ(flagged, std::stoll(r[d]) > design["threshold"].get<long long>());
        auto& c = counts[usage];
        c.first += usage == 0.0 ? flagged : !flagged;
        ++c.second;
      }
      for (const auto& row : design["rows"]) {
        const auto& c = counts.at(row["usage_s"].get<double>());
        EXPECT_EQ(row["missed"].get<int>(), c.first) << fig << " " << v;
        EXPECT_EQ(row["total"].get<int>(), c.second);
        EXPECT_DOUBLE_EQ(row["error_rate"].get<double>(), static_cast<double>(c.first) / c.second);
      }
    }
  }
}

TEST_F(Experiments, Fig5SummaryMatchesDatasets) {
  const json s = summary_of(dir(), "fig5");
  for (const auto& sp : s["spreads"]) {
    const std::string path = "fig5_deltas_" + sp["kind"].get<std::string>() + "_" +
                             std::to_string(sp["stages"].get<int>()) + ".csv";
    const auto deltas = column(read_csv((dir() / path).string()), "raw_delta_s");
    EXPECT_NEAR(sp["moments"]["std"].get<double>(), sample_sd(deltas), 1e-9 * sample_sd(deltas));
  }
  const CrpDataset inv = read_crp_dataset_file((dir() / "fig5_crps_inv.txt").string());
  const CrpDataset st = read_crp_dataset_file((dir() / "fig5_crps_st.txt").string());
  const HdReport hi = intra_hd(inv), hs = intra_hd(st);
  EXPECT_DOUBLE_EQ(s["intra_hd"]["inverter"]["mean"].get<double>(), hi.mean);
  EXPECT_DOUBLE_EQ(s["intra_hd"]["st"]["mean"].get<double>(), hs.mean);
  EXPECT_DOUBLE_EQ(s["intra_hd"]["mean_improvement"].get<double>(), (hi.mean - hs.mean) / hi.mean);
  EXPECT_EQ(inv.entries.size(), 20u * 4u * 32u);
}

TEST_F(Experiments, Fig6eRatiosMatchFaultTable) {
  const json s = summary_of(dir(), "fig6e");
  const CsvTable t = read_csv((dir() / "fig6e_faults.csv").string());
  std::map<std::string, double> faults;
  const auto v = t.column("vdd"), k = t.column("kind"), f = t.column("faults");
  const double cmp = s["comparison_vdd"].get<double>();
  for (const auto& r : t.rows)
    if (std::stod(r[v]) == cmp) faults[r[k]] = std::stod(r[f]);
  ASSERT_EQ(faults.size(), 3u);
  if (faults["8t"] > 0) EXPECT_DOUBLE_EQ(s["ratio_6t_8t"].get<double>(), faults["6t"] / faults["8t"]);
  else EXPECT_TRUE(s["ratio_6t_8t"].is_null());
  if (faults["7t"] > 0) EXPECT_DOUBLE_EQ(s["ratio_6t_7t"].get<double>(), faults["6t"] / faults["7t"]);
  else EXPECT_TRUE(s["ratio_6t_7t"].is_null());
  EXPECT_EQ(fs::file_size(dir() / "fig6e_fingerprint_6t.bin"), 16u * 16u / 8u);
}

TEST_F(Experiments, NistSummaryMatchesTable) {
  const json s = summary_of(dir(), "nist");
  const CsvTable t = read_csv((dir() / "nist_reference.csv").string());
  ASSERT_EQ(t.rows.size(), s["reference"]["rows"].size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(t.rows[i][t.column("test_name")], s["reference"]["rows"][i]["test"]);
    EXPECT_EQ(std::stoi(t.rows[i][t.column("passed")]), s["reference"]["rows"][i]["passed"].get<int>());
    EXPECT_EQ(std::stoi(t.rows[i][t.column("trials")]), 3);
  }
}

TEST(ExperimentsErrors, UnknownNameIsArgumentError) {
  try {
    run_experiment("fig9", reduced(), (fs::temp_directory_path() / "stpuf_unused").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Argument);
  }
}

TEST(ExperimentsErrors, UnwritableDirectoryIsIoError) {
  try {
    run_experiment("fig2b", reduced(), "/proc/stpuf/out");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Io);
  }
}

TEST(Describe, MomentsOfKnownSample) {
  const std::vector<double> v{1, 2, 3, 4};
  const Moments m = describe(v);
  EXPECT_EQ(m.count, 4u);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.std, std::sqrt(5.0 / 3.0));
  EXPECT_EQ(m.min, 1);
  EXPECT_EQ(m.max, 4);
  for (double x : {0.1, 1e-300, -2.5e-13, 1.0 / 3.0}) EXPECT_EQ(std::stod(format_double(x)), x);
}
