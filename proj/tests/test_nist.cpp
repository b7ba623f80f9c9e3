#include <gtest/gtest.h>

#include <cmath>

#include "stpuf/keyed_rng.hpp"
#include "stpuf/nist.hpp"

using namespace stpuf;

namespace {

std::vector<std::uint8_t> bits(const std::string& s) {
  std::vector<std::uint8_t> v;
  for (char c : s) v.push_back(c == '1');
  return v;
}

// First 100 binary digits of pi.
const std::string kPi100 =
    "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";

const std::string kLongRun128 =
    "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111"
    "001100111001101101100010110010";

std::vector<std::uint8_t> random_bits(std::size_t n, std::uint64_t seed) {
  const StreamKey k(seed);
  std::vector<std::uint8_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = k.coin(i);
  return v;
}

}  // namespace

TEST(Nist, PublishedExampleValues) {
  const auto e = bits(kPi100);
  ASSERT_EQ(e.size(), 100u);
  EXPECT_NEAR(frequency_test(e).p_value, 0.109599, 1e-6);
  EXPECT_NEAR(block_frequency_test(e, 10).p_value, 0.706438, 1e-6);
  EXPECT_NEAR(runs_test(e).p_value, 0.500798, 1e-6);
  const auto cusum = cumulative_sums_test(e);
  ASSERT_EQ(cusum.size(), 2u);
  EXPECT_NEAR(cusum[0].p_value, 0.219194, 1e-6);
  EXPECT_NEAR(cusum[1].p_value, 0.114866, 1e-6);
}

TEST(Nist, LongestRunExample) {
  const auto e = bits(kLongRun128);
  ASSERT_EQ(e.size(), 128u);
  EXPECT_NEAR(longest_run_test(e).p_value, 0.180609, 1e-6);
}

TEST(Nist, FrequencyMatchesDirectFormula) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto v = random_bits(1000 + 37 * s, s);
    long long sum = 0;
    for (auto b : v) sum += b ? 1 : -1;
    const double want = std::erfc(std::abs(static_cast<double>(sum)) / std::sqrt(2.0 * v.size()));
    EXPECT_NEAR(frequency_test(v).p_value, want, 1e-6);
  }
}

TEST(Nist, AllZerosFailsEverything) {
  const std::vector<std::uint8_t> zeros(20000, 0);
  for (const auto& r : nist_suite(zeros)) {
    EXPECT_FALSE(r.insufficient_data) << r.test_name;
    EXPECT_FALSE(r.pass) << r.test_name;
  }
}

TEST(Nist, AlternatingBitsBalancedButNotRandom) {
  std::vector<std::uint8_t> alt(10000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2;
  EXPECT_DOUBLE_EQ(frequency_test(alt).p_value, 1.0);
  EXPECT_FALSE(runs_test(alt).pass);
}

TEST(Nist, ShortInputIsFlaggedNotFailed) {
  const auto v = random_bits(50, 1);
  const auto rows = nist_suite(v);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.insufficient_data) << r.test_name;
    EXPECT_FALSE(r.pass);
  }
  EXPECT_TRUE(spectral_test(random_bits(999, 2)).insufficient_data);
  EXPECT_FALSE(spectral_test(random_bits(1000, 2)).insufficient_data);
  EXPECT_TRUE(longest_run_test(random_bits(127, 2)).insufficient_data);
}

TEST(Nist, SuiteHasOneRowPerStatistic) {
  const auto rows = nist_suite(random_bits(100000, 3));
  EXPECT_EQ(rows.size(), 11u);
  EXPECT_EQ(nist_test_names().size(), 9u);
  for (const auto& r : rows) {
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
  }
}

TEST(Nist, FixedSeedRandomStreamPasses) {
  int failures = 0;
  for (const auto& r : nist_suite(random_bits(1000000, 20140601))) {
    EXPECT_FALSE(r.insufficient_data) << r.test_name;
    failures += !r.pass;
  }
  // At alpha = 0.01 one failure out of eleven rows is plausible; more is not.
  EXPECT_LE(failures, 1);
}

TEST(Nist, IncompleteGammaClosedForms) {
  for (double x : {0.01, 0.5, 1.0, 3.7, 12.0, 40.0}) {
    EXPECT_NEAR(igamc(1.0, x), std::exp(-x), 1e-10);
    EXPECT_NEAR(igamc(0.5, x), std::erfc(std::sqrt(x)), 1e-10);
  }
  EXPECT_EQ(igamc(2.0, 0.0), 1.0);
}
