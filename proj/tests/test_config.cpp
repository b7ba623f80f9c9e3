#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "stpuf/config.hpp"
#include "stpuf/error.hpp"

using namespace stpuf;
using nlohmann::json;

namespace {

std::string source_file(const std::string& rel) { return std::string(STPUF_SOURCE_DIR) + "/" + rel; }

ErrorCategory category_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.category();
  }
  return ErrorCategory::Internal;
}

}  // namespace

TEST(Config, ShippedFileMatchesBuiltInDefaults) {
  const ExperimentConfig shipped = load_config(source_file("config/default.json"));
  EXPECT_EQ(config_to_json(shipped, false), config_to_json(default_config(), false));
  EXPECT_TRUE(shipped.provenance.is_object());
  EXPECT_EQ(config_hash(shipped), config_hash(default_config()));
}

TEST(Config, JsonRoundTrip) {
  const ExperimentConfig c = default_config();
  const json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  EXPECT_EQ(config_from_json(j).variation.master_seed, c.seed);
}

TEST(Config, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "stpuf_config_roundtrip.json").string();
  ExperimentConfig c = default_config();
  c.sram.cycles = 17;
  save_config(path, c);
  EXPECT_EQ(config_hash(load_config(path)), config_hash(c));
  std::filesystem::remove(path);
}

TEST(Config, UnknownKeyIsRejected) {
  json j = config_to_json(default_config());
  j["device"]["fudge"] = 1.0;
  EXPECT_EQ(category_of(j), ErrorCategory::Config);
  j = config_to_json(default_config());
  j["extra_section"] = json::object();
  EXPECT_EQ(category_of(j), ErrorCategory::Config);
}

TEST(Config, MissingKeyIsRejected) {
  json j = config_to_json(default_config());
  j["aging"].erase("bti_prefactor");
  EXPECT_EQ(category_of(j), ErrorCategory::Config);
}

TEST(Config, WrongTypeIsRejected) {
  json j = config_to_json(default_config());
  j["sram"]["rows"] = "many";
  EXPECT_EQ(category_of(j), ErrorCategory::Config);
  j = config_to_json(default_config());
  j["sram"]["rows"] = 12.5;
  EXPECT_EQ(category_of(j), ErrorCategory::Config);
}

TEST(Config, OutOfRangeValueIsConfigError) {
  json j = config_to_json(default_config());
  j["variation"]["vth_sigma"] = -0.1;
  EXPECT_EQ(category_of(j), ErrorCategory::Config);
  j = config_to_json(default_config());
  j["sensor"]["stages"] = 30;
  EXPECT_EQ(category_of(j), ErrorCategory::Config);
  j = config_to_json(default_config());
  j["version"] = 99;
  EXPECT_EQ(category_of(j), ErrorCategory::Config);
}

TEST(Config, HashTracksConstantsOnly) {
  const ExperimentConfig a = default_config();
  ExperimentConfig b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.provenance = json{{"note", "anything"}};
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.device.feedback_gain += 1e-9;
  EXPECT_NE(config_hash(a), config_hash(b));
  b = a;
  b.seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, UsageSecondsFromLabels) {
  const auto u = default_config().usage_seconds();
  ASSERT_EQ(u.size(), 5u);
  EXPECT_DOUBLE_EQ(u[0], 0.1);
  EXPECT_DOUBLE_EQ(u[1], 10.0);
  EXPECT_DOUBLE_EQ(u[2], 90.0);
  EXPECT_DOUBLE_EQ(u[3], 900.0);
  EXPECT_DOUBLE_EQ(u[4], 86400.0);
}

TEST(Duration, Parsing) {
  EXPECT_DOUBLE_EQ(parse_duration("0.1s"), 0.1);
  EXPECT_DOUBLE_EQ(parse_duration("10"), 10.0);
  EXPECT_DOUBLE_EQ(parse_duration("250ms"), 0.25);
  EXPECT_DOUBLE_EQ(parse_duration("1.5min"), 90.0);
  EXPECT_DOUBLE_EQ(parse_duration("2h"), 7200.0);
  EXPECT_DOUBLE_EQ(parse_duration("1day"), 86400.0);
  for (const char* bad : {"", "abc", "5 parsecs", "-1s", "nan"}) {
    try {
      parse_duration(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), ErrorCategory::Argument) << bad;
    }
  }
}

TEST(Config, MissingFileIsIoError) {
  try {
    load_config("/nonexistent/stpuf.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Io);
  }
}

TEST(Config, MalformedJsonIsConfigError) {
  const auto path = (std::filesystem::temp_directory_path() / "stpuf_config_bad.json").string();
  std::ofstream(path) << "{ \"version\": ";
  try {
    load_config(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Config);
  }
  std::filesystem::remove(path);
}
