#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stpuf/device_models.hpp"
#include "stpuf/keyed_rng.hpp"
#include "stpuf/population.hpp"

namespace stpuf {

// Segment slots of a switch stage. Challenge bit 0 routes the signal that
// is on the top path through TopStraight (it stays on top) and the bottom
// one through BottomStraight. Bit 1 routes the top signal through TopCross
// onto the bottom path and the bottom signal through BottomCross onto top.
enum Segment : std::size_t { TopStraight = 0, BottomStraight = 1, TopCross = 2, BottomCross = 3 };

struct SwitchStage {
  std::array<GateParams, 4> segments;
};

struct ArbiterPufInstance {
  std::uint32_t chip_id = 0;
  std::vector<SwitchStage> stages;
  GateKind stage_kind = GateKind::Inverter;
  double setup_window = 0.0;  // s, half-width of the metastable band
};

using Challenge = std::vector<std::uint8_t>;  // one 0/1 entry per stage
using SegmentDelays = std::vector<std::array<double, 4>>;

// Response convention: 1 when the top path arrives first (raw_delta < 0).
struct CrpRecord {
  Challenge challenge;
  int response = 0;
  double raw_delta = 0.0;  // top arrival minus bottom arrival, s
};

std::string arbiter_circuit(GateKind kind);
void add_arbiter_circuit(DeviceManifest& manifest, GateKind kind, int stages);
ArbiterPufInstance build_arbiter(const ChipInstance& chip, GateKind kind, int stages,
                                 const DeviceConstants& constants, double setup_window);

SegmentDelays segment_delays(const ArbiterPufInstance& puf, const EnvCondition& env);
// (top_arrival, bottom_arrival) for precomputed segment delays.
std::pair<double, double> trace_paths(const SegmentDelays& delays, const Challenge& challenge);
std::pair<double, double> path_delays(const ArbiterPufInstance& puf, const Challenge& challenge,
                                      const EnvCondition& env);

// Applies the arbiter decision rule to a delay difference.
int arbitrate(double raw_delta, double setup_window, const StreamKey& noise);

CrpRecord evaluate(const ArbiterPufInstance& puf, const Challenge& challenge,
                   const EnvCondition& env, const StreamKey& noise);

std::vector<Challenge> all_challenges(int stages);
std::vector<Challenge> random_challenges(int stages, int count, const StreamKey& key);

// Stage i is bit i of the value; printed as fixed-width lowercase hex.
std::string challenge_to_hex(const Challenge& c);
Challenge challenge_from_hex(const std::string& hex, int stages);

struct DeltaDistribution {
  std::vector<double> samples;
  double mean = 0.0;
  double std = 0.0;
  double fraction_positive = 0.0;
};

DeltaDistribution delta_distribution(const std::vector<ArbiterPufInstance>& pufs,
                                     const std::vector<Challenge>& challenges,
                                     const EnvCondition& env);

struct EnvNoiseSpec {
  double nominal_vdd = 1.0;
  double vdd_fraction = 0.10;  // uniform ±fraction of nominal
  double temp_min = 248.0;
  double temp_max = 358.0;
};

void validate(const EnvNoiseSpec& n);
EnvCondition draw_environment(const EnvNoiseSpec& noise, const StreamKey& key);

struct CrpEntry {
  std::uint32_t chip_id = 0;
  std::uint32_t repeat_id = 0;
  std::uint32_t challenge_index = 0;
  std::uint8_t response = 0;
};

struct CrpDataset {
  int stages = 0;
  std::vector<Challenge> challenges;
  std::vector<CrpEntry> entries;  // ordered by chip, repeat, challenge
};

CrpDataset crp_dataset(const std::vector<ArbiterPufInstance>& pufs, int n_challenges,
                       int n_repeats, const EnvNoiseSpec& noise, std::uint64_t seed);

// Line format: "chip_id,repeat_id,challenge_hex,response"; lines starting
// with '#' are metadata.
void write_crp_dataset(std::ostream& os, const CrpDataset& data,
                       const std::vector<std::string>& header_lines = {});
void write_crp_dataset_file(const std::string& path, const CrpDataset& data,
                            const std::vector<std::string>& header_lines = {});
CrpDataset read_crp_dataset(std::istream& is);
CrpDataset read_crp_dataset_file(const std::string& path);

}  // namespace stpuf
