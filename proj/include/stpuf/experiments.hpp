#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stpuf/arbiter_puf.hpp"
#include "stpuf/config.hpp"
#include "stpuf/metrics.hpp"
#include "stpuf/nist.hpp"
#include "stpuf/recycling_sensor.hpp"
#include "stpuf/sram_puf.hpp"

namespace stpuf {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
};

// Summary statistics in input order. Output files embed these, and tests
// recompute them from the re-read rows.
Moments describe(std::span<const double> values);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// ---- populations ----------------------------------------------------------

SensorModel sensor_model(const ExperimentConfig& c);
std::vector<ChipInstance> sensor_population(const ExperimentConfig& c);
// One manifest holding both arbiter kinds at `max_stages`.
std::vector<ChipInstance> arbiter_population(const ExperimentConfig& c, int max_stages);
std::vector<ArbiterPufInstance> build_arbiters(const ExperimentConfig& c,
                                               const std::vector<ChipInstance>& population,
                                               GateKind kind, int stages);

// ---- recycling sensor -----------------------------------------------------

struct SensitivityPoint {
  double delta_vth = 0.0;
  double inverter_ratio = 0.0;  // d(ΔV)/d(0)
  double st_ratio = 0.0;
  double sensitivity = 0.0;
};

std::vector<SensitivityPoint> sensitivity_sweep(const ExperimentConfig& c);
double sensitivity_endpoint(const ExperimentConfig& c);

struct CalibrationSpread {
  std::string variant;
  std::vector<double> pre;   // ro_a minus ro_b, untrimmed
  std::vector<double> post;  // fresh minus stressed after trimming
  std::vector<std::uint32_t> quanta;
  Moments pre_moments;
  Moments post_moments;
  int negative_post = 0;
  int outside_quantum = 0;  // chips whose post difference is not below one quantum step
};

CalibrationSpread calibration_spread(const ExperimentConfig& c, const std::vector<ChipInstance>& pop,
                                     const std::string& variant);

ErrorRateTable detection_table(const ExperimentConfig& c, const std::vector<ChipInstance>& pop,
                               const std::string& variant, const std::vector<double>& usages);

// ---- arbiter PUF ----------------------------------------------------------

struct SpreadRow {
  int stages = 0;
  GateKind kind = GateKind::Inverter;
  DeltaDistribution distribution;
};

std::vector<Challenge> spread_challenges(const ExperimentConfig& c, int stages);
std::vector<SpreadRow> delay_spreads(const ExperimentConfig& c);

struct HdComparison {
  EnvNoiseSpec noise;
  int stages = 0;
  HdReport intra_inverter;
  HdReport intra_st;
  HdReport inter_inverter;
  HdReport inter_st;
  double mean_improvement = 0.0;   // (inv - st) / inv
  double sigma_improvement = 0.0;
  CrpDataset inverter_data;
  CrpDataset st_data;
};

HdComparison intra_hd_comparison(const ExperimentConfig& c);

// ---- SRAM PUF -------------------------------------------------------------

struct SramComparison {
  std::vector<FaultReport> reports;
  double comparison_vdd = 0.0;
  std::optional<double> ratio_8t;  // faults(6T)/faults(8T) at comparison_vdd; empty if 8T has none or the grid skips it
  std::optional<double> ratio_7t;
  std::vector<int> fingerprint;    // registered 6T bits
  double uniformity = 0.0;
};

std::map<BitcellKind, std::vector<BitcellParams>> registered_sram_arrays(const ExperimentConfig& c);
SramComparison sram_comparison(const ExperimentConfig& c, const std::vector<double>& vdds);

// ---- NIST -----------------------------------------------------------------

// Reference bitstream for trial `trial`, from a seeded ChaCha20 stream.
BitVector reference_bitstream(const ExperimentConfig& c, int trial, std::size_t bits);

struct NistProportion {
  std::string test_name;
  int passed = 0;
  int trials = 0;
  int insufficient = 0;
};

std::vector<NistProportion> nist_reference_trials(const ExperimentConfig& c, int trials,
                                                  std::size_t bits);

// ---- pipelines ------------------------------------------------------------

struct ExperimentResult {
  std::string name;
  std::vector<std::string> files;
  nlohmann::json summary;
};

const std::vector<std::string>& experiment_names();
ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& c,
                                const std::string& out_dir);

// Header lines that open every emitted CSV.
std::vector<std::string> output_header(const std::string& experiment, const ExperimentConfig& c);

// Simple CSV reader for emitted files; '#' lines are returned separately.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// ---- command helpers ------------------------------------------------------

struct SensorSimOptions {
  std::vector<std::string> usages;    // empty: use the config list
  std::vector<std::string> variants;  // empty: all four designs
  std::string out;
  std::string histogram_out;          // optional
};

nlohmann::json sensor_sim(const ExperimentConfig& c, const SensorSimOptions& o);

struct ArbiterSimOptions {
  int stages = 20;
  GateKind kind = GateKind::SchmittTrigger;
  int chips = 500;
  int challenges = 128;
  int repeats = 11;
  bool noise = true;
  std::string out;
};

nlohmann::json arbiter_sim(const ExperimentConfig& c, const ArbiterSimOptions& o);

struct SramSimOptions {
  std::vector<BitcellKind> kinds;  // empty: all three
  int rows = 128;
  int cols = 128;
  double vdd_lo = 0.6;
  double vdd_hi = 1.0;
  double vdd_step = 0.05;
  int cycles = 100;
  std::string out;
  std::string fingerprint_out;  // optional raw bit file of the registered bits
};

nlohmann::json sram_sim(const ExperimentConfig& c, const SramSimOptions& o);

// Reads a CRP dataset (or a raw bit file when `bit_file` is set) and writes
// HD statistics plus the NIST table as JSON.
nlohmann::json metrics_report(const ExperimentConfig& c, const std::string& in, bool bit_file,
                              const std::string& report_out);

nlohmann::json nist_to_json(const std::vector<NistResult>& rows);

}  // namespace stpuf
