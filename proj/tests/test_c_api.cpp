#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stpuf/stpuf.h"

namespace fs = std::filesystem;

namespace {

struct Ctx {
  stpuf_context* p = nullptr;
  Ctx() { EXPECT_EQ(stpuf_context_create(&p), STPUF_OK); }
  ~Ctx() { stpuf_context_destroy(p); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  stpuf_string_free(s);
  return out;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(stpuf_version(), "");
  EXPECT_STREQ(stpuf_status_name(STPUF_OK), "ok");
  for (int s = 2; s <= 9; ++s) EXPECT_STRNE(stpuf_status_name(s), "unknown") << s;
  EXPECT_STREQ(stpuf_status_name(42), "unknown");
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(stpuf_context_create(nullptr), STPUF_ERR_ARGUMENT);
  EXPECT_NE(std::string(stpuf_last_error()).find("NULL"), std::string::npos);
  double d = 0;
  EXPECT_EQ(stpuf_parse_duration(nullptr, &d), STPUF_ERR_ARGUMENT);
  EXPECT_EQ(stpuf_context_seed(nullptr, nullptr), STPUF_ERR_ARGUMENT);
}

TEST(CApi, LastErrorClearsOnSuccess) {
  double d = 0;
  EXPECT_EQ(stpuf_parse_duration("soon", &d), STPUF_ERR_ARGUMENT);
  EXPECT_STRNE(stpuf_last_error(), "");
  EXPECT_EQ(stpuf_parse_duration("1.5min", &d), STPUF_OK);
  EXPECT_DOUBLE_EQ(d, 90.0);
  EXPECT_STREQ(stpuf_last_error(), "");
}

TEST(CApi, ContextHashAndSeed) {
  Ctx c;
  char buf[17];
  EXPECT_EQ(stpuf_context_hash(c.p, buf, 8), STPUF_ERR_ARGUMENT);
  ASSERT_EQ(stpuf_context_hash(c.p, buf, sizeof buf), STPUF_OK);
  EXPECT_EQ(std::strlen(buf), 16u);
  const std::string before = buf;
  std::uint64_t seed = 0;
  ASSERT_EQ(stpuf_context_seed(c.p, &seed), STPUF_OK);
  EXPECT_EQ(seed, 20140601u);
  ASSERT_EQ(stpuf_context_set_seed(c.p, 7), STPUF_OK);
  ASSERT_EQ(stpuf_context_hash(c.p, buf, sizeof buf), STPUF_OK);
  EXPECT_NE(before, buf);
}

TEST(CApi, JsonRoundTripThroughContexts) {
  Ctx c;
  char* text = nullptr;
  ASSERT_EQ(stpuf_context_to_json(c.p, &text), STPUF_OK);
  const std::string j = take(text);
  stpuf_context* d = nullptr;
  ASSERT_EQ(stpuf_context_from_json(j.c_str(), &d), STPUF_OK);
  char h1[17], h2[17];
  stpuf_context_hash(c.p, h1, 17);
  stpuf_context_hash(d, h2, 17);
  EXPECT_STREQ(h1, h2);
  stpuf_context_destroy(d);

  EXPECT_EQ(stpuf_context_from_json("{", &d), STPUF_ERR_CONFIG);
  EXPECT_EQ(stpuf_context_from_json("{\"version\": 1}", &d), STPUF_ERR_CONFIG);
  EXPECT_EQ(stpuf_context_load("/nonexistent.json", &d), STPUF_ERR_IO);
}

TEST(CApi, SensitivityRatio) {
  Ctx c;
  double r = 0;
  ASSERT_EQ(stpuf_sensitivity_ratio(c.p, 0.0, &r), STPUF_OK);
  EXPECT_DOUBLE_EQ(r, 1.0);
  ASSERT_EQ(stpuf_sensitivity_ratio(c.p, 0.1, &r), STPUF_OK);
  EXPECT_GT(r, 1.0);
  EXPECT_EQ(stpuf_sensitivity_ratio(c.p, -0.1, &r), STPUF_ERR_ARGUMENT);
}

TEST(CApi, NistBufferProtocol) {
  Ctx c;
  std::vector<std::uint8_t> bits(2000);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (i * 2654435761u >> 7) & 1;
  std::size_t count = 0;
  ASSERT_EQ(stpuf_nist_suite(c.p, bits.data(), bits.size(), nullptr, 0, &count), STPUF_OK);
  EXPECT_EQ(count, 11u);
  std::vector<stpuf_nist_row> rows(count);
  ASSERT_EQ(stpuf_nist_suite(c.p, bits.data(), bits.size(), rows.data(), rows.size(), &count), STPUF_OK);
  EXPECT_STREQ(rows[0].test_name, "Frequency");
  for (const auto& r : rows) {
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
  }
}

TEST(CApi, HammingDistance) {
  const std::uint8_t a[] = {1, 0, 1, 1}, b[] = {0, 0, 1, 0};
  std::size_t d = 0;
  ASSERT_EQ(stpuf_hamming_distance(a, b, 4, &d), STPUF_OK);
  EXPECT_EQ(d, 2u);
  ASSERT_EQ(stpuf_hamming_distance(nullptr, nullptr, 0, &d), STPUF_OK);
  EXPECT_EQ(d, 0u);
  EXPECT_EQ(stpuf_hamming_distance(nullptr, b, 4, &d), STPUF_ERR_ARGUMENT);
}

TEST(CApi, RunExperimentReturnsSummary) {
  Ctx c;
  const auto dir = fs::temp_directory_path() / "stpuf_c_api_run";
  char* text = nullptr;
  ASSERT_EQ(stpuf_run_experiment(c.p, "fig2b", dir.c_str(), &text), STPUF_OK) << stpuf_last_error();
  const auto j = nlohmann::json::parse(take(text));
  EXPECT_EQ(j["experiment"], "fig2b");
  EXPECT_TRUE(fs::exists(dir / "fig2b_sensitivity.csv"));
  EXPECT_EQ(stpuf_run_experiment(c.p, "fig7", dir.c_str(), nullptr), STPUF_ERR_ARGUMENT);
  fs::remove_all(dir);
}

TEST(CApi, SramOptionsValidateKinds) {
  Ctx c;
  stpuf_sram_options o;
  stpuf_sram_options_default(&o);
  o.kinds = "6t,5t";
  o.rows = o.cols = 4;
  const auto out = fs::temp_directory_path() / "stpuf_c_api_sram.csv";
  EXPECT_EQ(stpuf_sram_sim(c.p, &o, out.c_str(), nullptr, nullptr), STPUF_ERR_ARGUMENT);
  o.kinds = "6t";
  o.cycles = 2;
  EXPECT_EQ(stpuf_sram_sim(c.p, &o, out.c_str(), nullptr, nullptr), STPUF_OK) << stpuf_last_error();
  fs::remove(out);
}

TEST(CApi, ArbiterOptionsValidateKind) {
  Ctx c;
  stpuf_arbiter_options o;
  stpuf_arbiter_options_default(&o);
  EXPECT_EQ(o.stages, 20);
  o.kind = "nand";
  const auto out = fs::temp_directory_path() / "stpuf_c_api_crp.txt";
  EXPECT_EQ(stpuf_arbiter_sim(c.p, &o, out.c_str(), nullptr), STPUF_ERR_ARGUMENT);
}
