#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stpuf/device_models.hpp"
#include "stpuf/keyed_rng.hpp"
#include "stpuf/population.hpp"

namespace stpuf {

enum class BitcellKind { SixT, EightT, SevenTNV };
enum class MtjState { Unprogrammed, LowOnLeft, LowOnRight };

const char* bitcell_kind_name(BitcellKind k) noexcept;  // "6t", "8t", "7t"
BitcellKind parse_bitcell_kind(const std::string& s);

// The response bit is the value of the left storage node. A positive skew
// favours the left node powering up high.
struct BitcellParams {
  BitcellKind kind = BitcellKind::SixT;
  double skew = 0.0;            // (V_TH,PR - V_TH,PL) + (V_TH,NL - V_TH,NR), V
  double latch_strength = 0.0;  // r8, 8T only
  double mtj_strength = 0.0;    // r7, 7T only
  MtjState mtj_state = MtjState::Unprogrammed;
  std::optional<int> registered_bit;
  bool latch_enabled = false;     // 8T: LE low, latch reinforcing
  bool mtj_gate_enabled = false;  // 7T: mux EN on with PL=0 during power-up
};

// Device slots of a bitcell in the manifest: PL, PR, NL, NR.
double skew_from_shifts(std::span<const double> shifts);

struct NoiseSpec {
  double sigma0 = 0.005;             // V at nominal supply
  double voltage_gain = 0.05;        // V per V below nominal
  double temperature_gain = 0.0;     // V per K above reference
  double nominal_vdd = 1.0;
  double reference_temperature = 298.0;

  double sigma(const EnvCondition& env) const;
};

void validate(const NoiseSpec& n);

// Signed skew added by the active reinforcement path (0 when none).
double reinforcement(const BitcellParams& cell);

int power_up(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
             const StreamKey& key);

// Registration. Each performs one unreinforced power-up and records the bit.
BitcellParams register_6t(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
                          const StreamKey& key);
BitcellParams register_8t(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
                          const StreamKey& key);
// Two-step MTJ write: PL=0 writes high resistance under the node holding 1,
// PL=1 writes low resistance under the node holding 0. Leaves the gating mux
// enabled so later power-ups are reinforced.
BitcellParams program_mtj(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
                          const StreamKey& key);
BitcellParams register_cell(const BitcellParams& cell, const EnvCondition& env,
                            const NoiseSpec& noise, const StreamKey& key);

// Enables or disables the 7T MTJ gating mux (EN).
BitcellParams set_mtj_gate(const BitcellParams& cell, bool enabled);

std::string sram_circuit();
void add_sram_circuit(DeviceManifest& manifest, std::uint32_t cells);

std::vector<BitcellParams> build_sram_array(const ChipInstance& chip, BitcellKind kind,
                                            std::uint32_t cells, double latch_strength,
                                            double mtj_strength);

// Registers every cell at `env`; cell i uses key.derive(i).
std::vector<BitcellParams> register_array(const std::vector<BitcellParams>& cells,
                                          const EnvCondition& env, const NoiseSpec& noise,
                                          const StreamKey& key);

std::vector<int> registered_bits(const std::vector<BitcellParams>& cells);

struct FaultReport {
  double vdd = 0.0;
  BitcellKind kind = BitcellKind::SixT;
  std::uint64_t faults = 0;
  std::uint64_t cells = 0;
  std::uint64_t cycles = 0;
  double fault_rate = 0.0;  // faults / (cells * cycles)
};

// Powers every registered cell `cycles` times at each supply. Noise draws
// depend only on (cell, supply, cycle), so all kinds see the same noise.
std::vector<FaultReport> fault_sweep(const std::map<BitcellKind, std::vector<BitcellParams>>& arrays,
                                     const std::vector<double>& vdd_grid, int cycles,
                                     const NoiseSpec& noise, double temperature,
                                     const StreamKey& key);

std::vector<double> vdd_grid(double lo, double hi, double step);

}  // namespace stpuf
