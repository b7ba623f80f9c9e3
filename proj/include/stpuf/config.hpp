#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stpuf/arbiter_puf.hpp"
#include "stpuf/device_models.hpp"
#include "stpuf/nist.hpp"
#include "stpuf/population.hpp"
#include "stpuf/recycling_sensor.hpp"
#include "stpuf/sram_puf.hpp"

namespace stpuf {

struct SensorSettings {
  SensorConfig base;  // stress_rails hold the boosted rails
  std::vector<std::string> usages{"0.1s", "10s", "1.5min", "15min", "1day"};
  int histogram_bins = 40;
};

struct ArbiterSettings {
  std::vector<int> stage_counts{4, 10, 20};
  int chips = 500;
  int fig5_challenges = 1024;  // sampled challenges for more than 4 stages
  int hd_stages = 20;
  int hd_challenges = 128;
  int hd_repeats = 11;
  double setup_window = 2e-13;
  EnvNoiseSpec noise;
};

struct SramSettings {
  int rows = 128;
  int cols = 128;
  int cycles = 100;
  double vdd_min = 0.6;
  double vdd_max = 1.0;
  double vdd_step = 0.05;
  double comparison_vdd = 0.6;
  double nominal_vdd = 1.0;
  double temperature = 298.0;
  double latch_strength = 0.026;
  double mtj_strength = 0.015;
  NoiseSpec noise;
};

struct NistSettings {
  NistParams params;
  int reference_trials = 100;
  int reference_bits = 1000000;
};

// Every constant the engine consumes. Parsing is strict: unknown or missing
// keys are Config errors.
struct ExperimentConfig {
  int version = 1;
  std::uint64_t seed = 20140601;
  DeviceConstants device;
  AgingModelParams aging;
  VariationSpec variation;  // master_seed mirrors `seed`
  SensorSettings sensor;
  ArbiterSettings arbiter;
  SramSettings sram;
  NistSettings nist;
  nlohmann::json provenance;  // free-form, excluded from the hash

  std::vector<double> usage_seconds() const;
  NoiseSpec sram_noise() const;
};

inline constexpr int kConfigVersion = 1;

ExperimentConfig default_config();
void validate(const ExperimentConfig& c);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c, bool with_provenance = true);

ExperimentConfig load_config(const std::string& path);
void save_config(const std::string& path, const ExperimentConfig& c);

// 16 hex digits; changes iff a consumed constant changes.
std::string config_hash(const ExperimentConfig& c);

// "0.1s", "10s", "1.5min", "2h", "1day"; a bare number means seconds.
double parse_duration(const std::string& text);

}  // namespace stpuf
