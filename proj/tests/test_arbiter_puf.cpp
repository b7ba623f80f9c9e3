#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stpuf/config.hpp"
#include "stpuf/error.hpp"
#include "stpuf/experiments.hpp"
#include "stpuf/metrics.hpp"

using namespace stpuf;

namespace {

// Follows each launched edge through the switches on its own.
std::pair<double, double> walk_oracle(const SegmentDelays& d, const Challenge& c) {
  double t[2] = {0.0, 0.0};
  bool on_top[2] = {true, false};
  for (std::size_t s = 0; s < d.size(); ++s)
    for (int e = 0; e < 2; ++e) {
      if (c[s] == 0) {
        t[e] += on_top[e] ? d[s][TopStraight] : d[s][BottomStraight];
      } else {
        t[e] += on_top[e] ? d[s][TopCross] : d[s][BottomCross];
        on_top[e] = !on_top[e];
      }
    }
  return on_top[0] ? std::pair{t[0], t[1]} : std::pair{t[1], t[0]};
}

ExperimentConfig small_config() {
  ExperimentConfig c = default_config();
  c.arbiter.chips = 80;
  c.arbiter.stage_counts = {4, 10};
  c.arbiter.fig5_challenges = 256;
  c.arbiter.hd_challenges = 64;
  c.arbiter.hd_repeats = 6;
  return c;
}

std::vector<ArbiterPufInstance> pufs(const ExperimentConfig& c, GateKind kind, int stages) {
  return build_arbiters(c, arbiter_population(c, stages), kind, stages);
}

EnvNoiseSpec quiet() {
  EnvNoiseSpec n;
  n.vdd_fraction = 0.0;
  n.temp_min = n.temp_max = 298.0;
  return n;
}

}  // namespace

TEST(ArbiterTrace, HandSetTwoStageDelays) {
  const SegmentDelays d{{1e-9, 2e-9, 3e-9, 4e-9}, {10e-9, 20e-9, 30e-9, 40e-9}};
  const struct {
    Challenge c;
    double top, bottom;
  } cases[] = {{{0, 0}, 11e-9, 22e-9}, {{1, 0}, 14e-9, 23e-9}, {{0, 1}, 42e-9, 31e-9}, {{1, 1}, 43e-9, 34e-9}};
  for (const auto& k : cases) {
    const auto [top, bottom] = trace_paths(d, k.c);
    EXPECT_DOUBLE_EQ(top, k.top);
    EXPECT_DOUBLE_EQ(bottom, k.bottom);
  }
  const StreamKey key(1);
  EXPECT_EQ(arbitrate(11e-9 - 22e-9, 0.0, key), 1);
  EXPECT_EQ(arbitrate(42e-9 - 31e-9, 0.0, key), 0);
}

TEST(ArbiterTrace, MatchesEdgeWalkOracle) {
  const ExperimentConfig c = small_config();
  const auto ps = pufs(c, GateKind::SchmittTrigger, 10);
  const EnvCondition env{1.0, 0.0, 298.0};
  for (std::size_t i = 0; i < 5; ++i) {
    const SegmentDelays d = segment_delays(ps[i], env);
    for (const auto& ch : all_challenges(10)) {
      const auto got = trace_paths(d, ch);
      const auto want = walk_oracle(d, ch);
      ASSERT_EQ(got.first, want.first);
      ASSERT_EQ(got.second, want.second);
    }
  }
}

TEST(ArbiterTrace, ZeroVariationGivesEqualArrivals) {
  ExperimentConfig c = small_config();
  c.variation.vth_sigma = 0.0;
  for (GateKind k : {GateKind::Inverter, GateKind::SchmittTrigger}) {
    const auto ps = pufs(c, k, 10);
    for (const auto& ch : random_challenges(10, 50, StreamKey(3))) {
      const auto [top, bottom] = path_delays(ps[0], ch, {1.0, 0.0, 298.0});
      EXPECT_EQ(top, bottom);
    }
  }
}

TEST(ArbiterTrace, SwappingPathLabelsFlipsSign) {
  const auto ps = pufs(small_config(), GateKind::Inverter, 10);
  SegmentDelays d = segment_delays(ps[4], {1.0, 0.0, 298.0});
  SegmentDelays swapped = d;
  for (auto& s : swapped) {
    std::swap(s[TopStraight], s[BottomStraight]);
    std::swap(s[TopCross], s[BottomCross]);
  }
  for (const auto& ch : random_challenges(10, 50, StreamKey(4))) {
    const auto a = trace_paths(d, ch);
    const auto b = trace_paths(swapped, ch);
    EXPECT_NEAR(a.first - a.second, -(b.first - b.second), 1e-24);
  }
}

TEST(ArbiterTrace, LengthMismatchThrows) {
  const auto ps = pufs(small_config(), GateKind::Inverter, 4);
  EXPECT_THROW(path_delays(ps[0], Challenge(5, 0), {1.0, 0.0, 298.0}), Error);
  EXPECT_THROW(trace_paths(SegmentDelays(3), Challenge(2, 0)), Error);
}

TEST(Arbitrate, CoinInsideSetupWindowIsFair) {
  int ones = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) ones += arbitrate(1e-14, 1e-13, StreamKey(s));
  EXPECT_GE(ones / 1e4, 0.45);
  EXPECT_LE(ones / 1e4, 0.55);
}

TEST(Arbitrate, OutsideWindowFollowsSign) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    EXPECT_EQ(arbitrate(-2e-13, 1e-13, StreamKey(s)), 1);
    EXPECT_EQ(arbitrate(2e-13, 1e-13, StreamKey(s)), 0);
  }
}

TEST(Challenges, HexRoundTrip) {
  for (const auto& ch : random_challenges(20, 200, StreamKey(9)))
    EXPECT_EQ(challenge_from_hex(challenge_to_hex(ch), 20), ch);
  EXPECT_EQ(challenge_to_hex(Challenge{1, 0, 0, 0, 1}), "11");
  EXPECT_EQ(all_challenges(3).size(), 8u);
}

TEST(Challenges, SingleBitFlipMovesDelta) {
  const auto ps = pufs(small_config(), GateKind::SchmittTrigger, 10);
  const SegmentDelays d = segment_delays(ps[1], {1.0, 0.0, 298.0});
  Challenge ch(10, 0);
  const auto base = trace_paths(d, ch);
  for (std::size_t i = 0; i < 10; ++i) {
    Challenge f = ch;
    f[i] = 1;
    const auto moved = trace_paths(d, f);
    EXPECT_NE(moved.first - moved.second, base.first - base.second) << i;
  }
}

TEST(Spreads, SchmittStagesSpreadWider) {
  const auto rows = delay_spreads(small_config());
  for (int s : {4, 10}) {
    const DeltaDistribution* inv = nullptr;
    const DeltaDistribution* st = nullptr;
    for (const auto& r : rows)
      if (r.stages == s) (r.kind == GateKind::Inverter ? inv : st) = &r.distribution;
    ASSERT_TRUE(inv && st);
    EXPECT_GT(st->std, inv->std) << s;
    EXPECT_GT(st->fraction_positive, 0.3);
    EXPECT_LT(st->fraction_positive, 0.7);
    EXPECT_GT(inv->fraction_positive, 0.3);
    EXPECT_LT(inv->fraction_positive, 0.7);
  }
}

TEST(CrpData, QuietRepeatsAreIdentical) {
  const ExperimentConfig c = small_config();
  auto ps = pufs(c, GateKind::Inverter, 20);
  for (auto& p : ps) p.setup_window = 0.0;
  const CrpDataset d = crp_dataset(ps, 64, 4, quiet(), 5);
  const HdReport intra = intra_hd(d);
  EXPECT_EQ(intra.mean, 0.0);
  EXPECT_EQ(intra.sigma, 0.0);
}

TEST(CrpData, WideSetupWindowApproachesRandomResponses) {
  auto ps = pufs(small_config(), GateKind::Inverter, 20);
  for (auto& p : ps) p.setup_window = 1e-6;
  const HdReport intra = intra_hd(crp_dataset(ps, 64, 4, quiet(), 5));
  EXPECT_NEAR(intra.mean, 0.5, 0.03);
}

TEST(CrpData, RegenerationIsByteIdentical) {
  const auto ps = pufs(small_config(), GateKind::SchmittTrigger, 20);
  std::ostringstream a, b;
  write_crp_dataset(a, crp_dataset(ps, 32, 3, EnvNoiseSpec{}, 77));
  write_crp_dataset(b, crp_dataset(ps, 32, 3, EnvNoiseSpec{}, 77));
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  const CrpDataset back = read_crp_dataset(in);
  std::ostringstream c;
  write_crp_dataset(c, back);
  EXPECT_EQ(c.str(), a.str());
}

TEST(CrpData, ChipsDisagreeOnHalfTheBits) {
  const auto ps = pufs(small_config(), GateKind::SchmittTrigger, 20);
  const HdReport inter = inter_hd(crp_dataset(ps, 128, 2, quiet(), 6));
  EXPECT_NEAR(inter.mean, 0.5, 0.05);
}

TEST(CrpData, EnvironmentStaysInsideNoiseBox) {
  const EnvNoiseSpec n;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const EnvCondition e = draw_environment(n, StreamKey(s));
    EXPECT_GE(e.vdd, 0.9);
    EXPECT_LE(e.vdd, 1.1);
    EXPECT_GE(e.temperature, 248.0);
    EXPECT_LE(e.temperature, 358.0);
  }
}

TEST(CrpData, SchmittStagesFlipLessUnderNoise) {
  const HdComparison h = intra_hd_comparison(small_config());
  EXPECT_LT(h.intra_st.mean, h.intra_inverter.mean);
  EXPECT_GT(h.mean_improvement, 0.0);
}
