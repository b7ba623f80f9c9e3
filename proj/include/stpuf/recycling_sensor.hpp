#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stpuf/device_models.hpp"
#include "stpuf/population.hpp"

namespace stpuf {

// Ring oscillator with a programmable trim load on every stage. Trim is held
// as an integer count of quanta so the load is always an exact multiple.
struct RingOscillator {
  std::vector<GateParams> stages;
  std::vector<std::uint32_t> trim_quanta;
  double trim_quantum = 0.0;  // F

  RingOscillator() = default;
  RingOscillator(std::vector<GateParams> stages, double trim_quantum);

  double trim_load(std::size_t stage) const { return trim_quanta[stage] * trim_quantum; }
  std::uint32_t total_trim_quanta() const noexcept;
};

void validate(const RingOscillator& ro);

double stage_delay(const RingOscillator& ro, std::size_t stage, const EnvCondition& env);
// Sum of stage delays; the oscillation period is twice this.
double ro_delay(const RingOscillator& ro, const EnvCondition& env);
double ro_frequency(const RingOscillator& ro, const EnvCondition& env);

struct CalibratedPair {
  RingOscillator fresh;
  RingOscillator stressed;
  std::size_t stressed_index = 1;  // which input became the stressed RO
  std::uint32_t quanta_added = 0;
};

// Makes the faster RO the stressed one and trims it, one quantum at a time
// round-robin over its stages, until ro_delay(fresh) - ro_delay(stressed)
// lies in [0, delay of the next quantum). Ties keep input `a` as fresh.
// Throws CalibrationRange if more than `budget` quanta would be needed.
CalibratedPair calibrate(const RingOscillator& a, const RingOscillator& b, const EnvCondition& env,
                         double quantum, std::uint32_t budget);

struct SensorConfig {
  int stages = 31;
  EnvCondition stress_rails{1.4, -0.25, 298.0};
  EnvCondition sense_rails{1.0, 0.0, 298.0};
  double timer_window = 6.4e-6;   // s
  double trim_quantum = 5e-17;    // F
  std::uint32_t trim_budget = 4096;
  GateKind gate_kind = GateKind::SchmittTrigger;
  bool high_vth = true;
  bool calibrated = true;
  bool ripple_enabled = false;
  double ripple_amplitude = 0.025;  // V, uniform ±amplitude on each rail per interval
};

void validate(const SensorConfig& c);

struct SensorReading {
  std::int64_t ref_ticks = 0;
  std::int64_t stressed_ticks = 0;
  std::int64_t tick_delta = 0;                // ref_ticks - stressed_ticks
  std::optional<double> usage_estimate;       // seconds; empty means "fresh"
};

// One sensor instance: a reference RO that never ages and a stressed RO
// that receives the (possibly boosted) stress rails.
class RecyclingSensor {
 public:
  // Assigns roles (and trims when config.calibrated) from two fresh ROs.
  static RecyclingSensor build(const SensorConfig& config, const AgingModelParams& aging,
                               const RingOscillator& ro_a, const RingOscillator& ro_b,
                               std::uint32_t chip_id = 0, std::uint64_t seed = 0);

  RecyclingSensor stress(double duration) const;
  SensorReading sense() const;

  const RingOscillator& reference() const noexcept { return reference_; }
  const RingOscillator& stressed() const noexcept { return stressed_; }
  const SensorConfig& config() const noexcept { return config_; }
  std::uint32_t quanta_added() const noexcept { return quanta_added_; }
  // ro_delay(reference) - ro_delay(stressed) at the sense rails.
  double delay_difference() const;

 private:
  RecyclingSensor() = default;

  SensorConfig config_;
  AgingModelParams aging_;
  RingOscillator reference_;
  RingOscillator stressed_;
  std::uint32_t quanta_added_ = 0;
  std::uint32_t chip_id_ = 0;
  std::uint64_t seed_ = 0;
  std::uint32_t intervals_ = 0;
};

// Circuit name used for the sensor ROs of a gate kind in the device manifest.
std::string sensor_circuit(GateKind kind, int ro_index);
void add_sensor_circuits(DeviceManifest& manifest, GateKind kind, int stages);

RingOscillator build_ring_oscillator(const ChipInstance& chip, const std::string& circuit,
                                     GateKind kind, const DeviceConstants& constants,
                                     bool high_vth, int stages, double trim_quantum);

struct SensorVariant {
  std::string name;
  SensorConfig config;
};

// The four designs compared in the detection experiments.
std::vector<SensorVariant> standard_variants(const SensorConfig& base);
SensorVariant find_variant(const SensorConfig& base, const std::string& name);

struct ThresholdPolicy {
  enum class Kind { ZeroFalsePositive, Fixed } kind = Kind::ZeroFalsePositive;
  std::int64_t fixed_threshold = 0;
};

struct DetectionRecord {
  std::uint32_t chip_id = 0;
  double usage_s = 0.0;
  SensorReading reading;
  bool classified = false;  // classified as recycled
};

struct UsageErrorRate {
  double usage_s = 0.0;
  int missed = 0;  // recycled chips not flagged (false positives when usage_s == 0)
  int total = 0;
  double error_rate = 0.0;
};

struct ErrorRateTable {
  std::string variant;
  std::int64_t threshold = 0;
  std::vector<UsageErrorRate> rows;  // usage 0 first, then the requested usages
  std::vector<DetectionRecord> records;
  std::map<double, std::map<std::int64_t, int>> histograms;  // usage -> tick_delta -> count

  const UsageErrorRate& at_usage(double usage_s) const;
};

struct SensorModel {
  DeviceConstants device;
  AgingModelParams aging;
  std::uint64_t seed = 0;
};

ErrorRateTable detection_experiment(const std::vector<ChipInstance>& population,
                                    const SensorModel& model, const SensorVariant& variant,
                                    const std::vector<double>& usages,
                                    const ThresholdPolicy& policy = {});

// Maps a tick delta back to a usage time using the zero-variation sensor of
// the same design. Returns empty for readings at or below the threshold.
class UsageEstimator {
 public:
  UsageEstimator(const SensorModel& model, const SensorConfig& config, std::int64_t threshold);
  std::optional<double> estimate(std::int64_t tick_delta) const;

 private:
  std::int64_t threshold_;
  std::vector<std::pair<double, double>> curve_;  // (tick_delta, seconds), ascending
};

}  // namespace stpuf
