#include "stpuf/sram_puf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "stpuf/error.hpp"

namespace stpuf {

const char* bitcell_kind_name(BitcellKind k) noexcept {
  switch (k) {
    case BitcellKind::SixT: return "6t";
    case BitcellKind::EightT: return "8t";
    case BitcellKind::SevenTNV: return "7t";
  }
  return "6t";
}

BitcellKind parse_bitcell_kind(const std::string& s) {
  if (s == "6t") return BitcellKind::SixT;
  if (s == "8t") return BitcellKind::EightT;
  if (s == "7t") return BitcellKind::SevenTNV;
  fail(ErrorCategory::Argument, "unknown bitcell kind '" + s + "' (expected 6t, 8t or 7t)");
}

double skew_from_shifts(std::span<const double> s) {
  require(s.size() == 4, "bitcell skew needs four device shifts (PL, PR, NL, NR)");
  return (s[1] - s[0]) + (s[2] - s[3]);
}

double NoiseSpec::sigma(const EnvCondition& env) const {
  return sigma0 + voltage_gain * std::max(0.0, nominal_vdd - env.vdd) +
         temperature_gain * std::max(0.0, env.temperature - reference_temperature);
}

void validate(const NoiseSpec& n) {
  require(n.sigma0 >= 0.0 && n.voltage_gain >= 0.0 && n.temperature_gain >= 0.0,
          "noise spec terms must be >= 0");
}

double reinforcement(const BitcellParams& cell) {
  if (!cell.registered_bit) return 0.0;
  const double sign = *cell.registered_bit ? 1.0 : -1.0;
  switch (cell.kind) {
    case BitcellKind::EightT:
      return cell.latch_enabled ? sign * cell.latch_strength : 0.0;
    case BitcellKind::SevenTNV:
      if (!cell.mtj_gate_enabled || cell.mtj_state == MtjState::Unprogrammed) return 0.0;
      // The low-resistance MTJ strengthens the pull-down of its node.
      return cell.mtj_state == MtjState::LowOnLeft ? -cell.mtj_strength : cell.mtj_strength;
    case BitcellKind::SixT:
      return 0.0;
  }
  return 0.0;
}

int power_up(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
             const StreamKey& key) {
  const double sigma = noise.sigma(env);
  const double n = sigma > 0.0 ? sigma * key.normal() : 0.0;
  return cell.skew + reinforcement(cell) + n > 0.0 ? 1 : 0;
}

namespace {

BitcellParams record(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
                     const StreamKey& key) {
  BitcellParams raw = cell;
  raw.latch_enabled = false;
  raw.mtj_gate_enabled = false;
  BitcellParams out = cell;
  out.registered_bit = power_up(raw, env, noise, key);
  return out;
}

}  // namespace

BitcellParams register_6t(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
                          const StreamKey& key) {
  require(cell.kind == BitcellKind::SixT, "register_6t: cell is not a 6T bitcell");
  return record(cell, env, noise, key);
}

BitcellParams register_8t(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
                          const StreamKey& key) {
  require(cell.kind == BitcellKind::EightT, "register_8t: cell is not an 8T bitcell");
  // LE high during power-up, then pulled low to enable the latch.
  BitcellParams out = record(cell, env, noise, key);
  out.latch_enabled = true;
  return out;
}

BitcellParams program_mtj(const BitcellParams& cell, const EnvCondition& env, const NoiseSpec& noise,
                          const StreamKey& key) {
  require(cell.kind == BitcellKind::SevenTNV, "program_mtj: cell is not a 7T NV bitcell");
  if (cell.mtj_state != MtjState::Unprogrammed)
    fail(ErrorCategory::Protocol, "program_mtj: MTJs are already programmed");
  BitcellParams out = record(cell, env, noise, key);
  out.mtj_state = *out.registered_bit == 0 ? MtjState::LowOnLeft : MtjState::LowOnRight;
  out.mtj_gate_enabled = true;
  return out;
}

BitcellParams register_cell(const BitcellParams& cell, const EnvCondition& env,
                            const NoiseSpec& noise, const StreamKey& key) {
  switch (cell.kind) {
    case BitcellKind::SixT: return register_6t(cell, env, noise, key);
    case BitcellKind::EightT: return register_8t(cell, env, noise, key);
    case BitcellKind::SevenTNV: return program_mtj(cell, env, noise, key);
  }
  fail(ErrorCategory::Internal, "register_cell: unknown kind");
}

BitcellParams set_mtj_gate(const BitcellParams& cell, bool enabled) {
  require(cell.kind == BitcellKind::SevenTNV, "set_mtj_gate: cell is not a 7T NV bitcell");
  if (enabled && cell.mtj_state == MtjState::Unprogrammed)
    fail(ErrorCategory::Protocol, "set_mtj_gate: cannot enable the MTJ path before programming");
  BitcellParams out = cell;
  out.mtj_gate_enabled = enabled;
  return out;
}

std::string sram_circuit() { return "sram"; }

void add_sram_circuit(DeviceManifest& manifest, std::uint32_t cells) {
  manifest.add_circuit(sram_circuit(), cells, 4);
}

std::vector<BitcellParams> build_sram_array(const ChipInstance& chip, BitcellKind kind,
                                            std::uint32_t cells, double latch_strength,
                                            double mtj_strength) {
  require(latch_strength >= 0.0 && mtj_strength >= 0.0, "reinforcement strengths must be >= 0");
  std::vector<BitcellParams> out;
  out.reserve(cells);
  const std::string circuit = sram_circuit();
  for (std::uint32_t i = 0; i < cells; ++i) {
    BitcellParams c;
    c.kind = kind;
    c.skew = skew_from_shifts(chip.gate_shifts(circuit, i, 4));
    if (kind == BitcellKind::EightT) c.latch_strength = latch_strength;
    if (kind == BitcellKind::SevenTNV) c.mtj_strength = mtj_strength;
    out.push_back(c);
  }
  return out;
}

std::vector<BitcellParams> register_array(const std::vector<BitcellParams>& cells,
                                          const EnvCondition& env, const NoiseSpec& noise,
                                          const StreamKey& key) {
  std::vector<BitcellParams> out;
  out.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    out.push_back(register_cell(cells[i], env, noise, key.derive(static_cast<std::uint64_t>(i))));
  return out;
}

std::vector<int> registered_bits(const std::vector<BitcellParams>& cells) {
  std::vector<int> bits;
  bits.reserve(cells.size());
  for (const auto& c : cells) {
    if (!c.registered_bit) fail(ErrorCategory::Protocol, "cell has not been registered");
    bits.push_back(*c.registered_bit);
  }
  return bits;
}

std::vector<FaultReport> fault_sweep(const std::map<BitcellKind, std::vector<BitcellParams>>& arrays,
                                     const std::vector<double>& grid, int cycles,
                                     const NoiseSpec& noise, double temperature,
                                     const StreamKey& key) {
  require(cycles >= 1, "fault_sweep: cycles must be >= 1");
  require(!grid.empty(), "fault_sweep: empty supply grid");
  validate(noise);
  std::size_t cell_count = 0;
  for (const auto& [kind, cells] : arrays) {
    for (const auto& c : cells)
      if (!c.registered_bit) fail(ErrorCategory::Protocol, "fault_sweep: cells must be registered first");
    cell_count = std::max(cell_count, cells.size());
  }

  std::vector<FaultReport> reports;
  for (double vdd : grid) {
    const EnvCondition env{vdd, 0.0, temperature};
    const double sigma = noise.sigma(env);
    const StreamKey vkey = key.derive(std::bit_cast<std::uint64_t>(vdd));
    std::map<BitcellKind, std::uint64_t> faults;
    for (const auto& [kind, cells] : arrays) faults[kind] = 0;
    for (std::size_t i = 0; i < cell_count; ++i) {
      const StreamKey ckey = vkey.derive(static_cast<std::uint64_t>(i));
      for (int cyc = 0; cyc < cycles; ++cyc) {
        const double n = sigma > 0.0 ? sigma * ckey.normal(static_cast<std::uint64_t>(cyc)) : 0.0;
        for (const auto& [kind, cells] : arrays) {
          if (i >= cells.size()) continue;
          const BitcellParams& c = cells[i];
          const int bit = c.skew + reinforcement(c) + n > 0.0 ? 1 : 0;
          if (bit != *c.registered_bit) ++faults[kind];
        }
      }
    }
    for (const auto& [kind, cells] : arrays) {
      FaultReport r;
      r.vdd = vdd;
      r.kind = kind;
      r.faults = faults[kind];
      r.cells = cells.size();
      r.cycles = static_cast<std::uint64_t>(cycles);
      r.fault_rate = cells.empty() ? 0.0
                                   : static_cast<double>(r.faults) /
                                         (static_cast<double>(r.cells) * static_cast<double>(cycles));
      reports.push_back(r);
    }
  }
  return reports;
}

std::vector<double> vdd_grid(double lo, double hi, double step) {
  require(step > 0.0 && hi >= lo, "vdd grid needs lo <= hi and a positive step");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    // Round to the micro-volt so grid points print cleanly.
    out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e6) / 1e6);
  }
  return out;
}

}  // namespace stpuf
