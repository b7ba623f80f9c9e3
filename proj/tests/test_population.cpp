#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stpuf/error.hpp"
#include "stpuf/population.hpp"

using namespace stpuf;

namespace {

std::shared_ptr<DeviceManifest> small_manifest() {
  auto m = std::make_shared<DeviceManifest>();
  m->add_circuit("ro.a", 31, 6);
  m->add_circuit("ro.b", 31, 2);
  return m;
}

VariationSpec spec(std::uint64_t seed = 11) {
  VariationSpec v;
  v.master_seed = seed;
  return v;
}

}  // namespace

TEST(Population, ZeroSigmaGivesIdenticalChips) {
  VariationSpec v = spec();
  v.vth_sigma = 0.0;
  v.vth_mean = 0.013;
  v.sample_count = 20;
  const auto chips = sample_population(v, small_manifest());
  ASSERT_EQ(chips.size(), 20u);
  for (const auto& c : chips)
    for (double s : c.shifts()) EXPECT_EQ(s, 0.013);
}

TEST(Population, MomentsMatchRequestedDistribution) {
  const auto chips = sample_population(spec(), small_manifest());
  ASSERT_EQ(chips.size(), 500u);
  double sum = 0, ss = 0;
  std::size_t n = 0;
  for (const auto& c : chips)
    for (double s : c.shifts()) {
      sum += s;
      ss += s * s;
      ++n;
    }
  const double mean = sum / n;
  const double sd = std::sqrt(ss / n - mean * mean);
  const double se_mean = 0.05 / std::sqrt(static_cast<double>(n));
  const double se_sd = 0.05 / std::sqrt(2.0 * n);
  EXPECT_NEAR(mean, 0.0, 3 * se_mean);
  EXPECT_NEAR(sd, 0.05, 3 * se_sd);
}

TEST(Population, EnumerationOrderDoesNotMatter) {
  auto forward = small_manifest();
  auto paths = forward->paths();
  std::reverse(paths.begin(), paths.end());
  auto backward = std::make_shared<DeviceManifest>(paths);
  VariationSpec v = spec();
  v.sample_count = 30;
  const auto a = sample_population(v, forward);
  const auto b = sample_population(v, backward);
  for (std::size_t c = 0; c < a.size(); ++c)
    for (const auto& p : forward->paths()) EXPECT_EQ(a[c].shift(p), b[c].shift(p));
}

TEST(Population, AddingACircuitLeavesExistingShiftsAlone) {
  auto base = small_manifest();
  auto grown = small_manifest();
  grown->add_circuit("extra", 10, 4);
  VariationSpec v = spec();
  v.sample_count = 10;
  const auto a = sample_population(v, base);
  const auto b = sample_population(v, grown);
  for (std::size_t c = 0; c < a.size(); ++c)
    for (const auto& p : base->paths()) EXPECT_EQ(a[c].shift(p), b[c].shift(p));
}

TEST(Population, ShiftIsPureFunctionOfSeedChipAndPath) {
  const DevicePath p{"ro.a", 3, 4};
  EXPECT_EQ(device_shift(spec(5), 17, p), device_shift(spec(5), 17, p));
  EXPECT_NE(device_shift(spec(5), 17, p), device_shift(spec(6), 17, p));
  EXPECT_NE(device_shift(spec(5), 17, p), device_shift(spec(5), 18, p));
}

TEST(Population, DistinctDevicesAreUncorrelated) {
  const auto manifest = small_manifest();
  const auto chips = sample_population(spec(), manifest);
  const auto& paths = manifest->paths();
  const double bound = 4.0 / std::sqrt(500.0);
  for (std::size_t i = 0; i + 1 < paths.size(); i += 23) {
    const std::size_t j = (i * 7 + 5) % paths.size();
    if (i == j) continue;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (const auto& c : chips) {
      const double x = c.shifts()[i], y = c.shifts()[j];
      sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
    }
    const double n = chips.size();
    const double cov = sxy / n - sx / n * sy / n;
    const double r = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    EXPECT_LT(std::abs(r), bound) << paths[i].str() << " vs " << paths[j].str();
  }
}

TEST(Population, EmptyManifestIsAnArgumentError) {
  try {
    sample_population(spec(), std::make_shared<DeviceManifest>());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Argument);
  }
}

TEST(Population, InvalidSpecIsRejected) {
  VariationSpec v = spec();
  v.vth_sigma = -0.01;
  EXPECT_THROW(validate(v), Error);
  v = spec();
  v.sample_count = 0;
  EXPECT_THROW(validate(v), Error);
}

TEST(Population, ManifestRejectsDuplicatesAndBadNames) {
  DeviceManifest m;
  m.add_circuit("x", 2, 2);
  EXPECT_THROW(m.add_circuit("x", 1, 1), Error);
  EXPECT_THROW(m.add_circuit("a/b", 1, 1), Error);
  EXPECT_THROW(m.index_of({"nope", 0, 0}), Error);
}

TEST(Population, ExportRoundTrips) {
  VariationSpec v = spec();
  v.sample_count = 4;
  const auto chips = sample_population(v, small_manifest());
  std::stringstream ss;
  write_population(ss, chips);
  const auto back = read_population(ss);
  ASSERT_EQ(back.size(), chips.size());
  for (std::size_t c = 0; c < chips.size(); ++c) {
    EXPECT_EQ(back[c].chip_id(), chips[c].chip_id());
    EXPECT_EQ(back[c].shifts(), chips[c].shifts());
    EXPECT_EQ(back[c].manifest().paths(), chips[c].manifest().paths());
  }
}

TEST(Population, PathStringForm) {
  EXPECT_EQ((DevicePath{"sensor.st.ro0", 12, 3}).str(), "sensor.st.ro0/12/3");
}
