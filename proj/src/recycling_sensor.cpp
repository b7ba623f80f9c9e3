#include "stpuf/recycling_sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stpuf/error.hpp"
#include "stpuf/keyed_rng.hpp"

namespace stpuf {

RingOscillator::RingOscillator(std::vector<GateParams> s, double quantum)
    : stages(std::move(s)), trim_quanta(stages.size(), 0u), trim_quantum(quantum) {
  validate(*this);
}

std::uint32_t RingOscillator::total_trim_quanta() const noexcept {
  return std::accumulate(trim_quanta.begin(), trim_quanta.end(), 0u);
}

void validate(const RingOscillator& ro) {
  require(!ro.stages.empty() && ro.stages.size() % 2 == 1, "ring oscillator needs an odd stage count");
  require(ro.trim_quanta.size() == ro.stages.size(), "one trim entry per stage required");
  require(ro.trim_quantum >= 0.0, "trim quantum must be >= 0");
}

double stage_delay(const RingOscillator& ro, std::size_t stage, const EnvCondition& env) {
  return gate_delay(ro.stages[stage], env, ro.trim_load(stage));
}

double ro_delay(const RingOscillator& ro, const EnvCondition& env) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ro.stages.size(); ++i) sum += stage_delay(ro, i, env);
  return sum;
}

double ro_frequency(const RingOscillator& ro, const EnvCondition& env) {
  return 1.0 / (2.0 * ro_delay(ro, env));
}

CalibratedPair calibrate(const RingOscillator& a, const RingOscillator& b, const EnvCondition& env,
                         double quantum, std::uint32_t budget) {
  validate(a);
  validate(b);
  require(quantum > 0.0, "calibrate: trim quantum must be positive");
  auto unstressed = [](const RingOscillator& ro) {
    for (const auto& g : ro.stages)
      for (const auto& t : g.transistors)
        if (t.vth_aging != 0.0 || !t.stress.empty()) return false;
    return true;
  };
  require(unstressed(a) && unstressed(b), "calibrate: both ROs must be unstressed");

  CalibratedPair out;
  const bool b_faster = ro_delay(b, env) <= ro_delay(a, env);
  out.stressed_index = b_faster ? 1 : 0;
  out.fresh = b_faster ? a : b;
  out.stressed = b_faster ? b : a;
  out.fresh.trim_quantum = quantum;
  out.stressed.trim_quantum = quantum;

  RingOscillator& s = out.stressed;
  const double fresh_delay = ro_delay(out.fresh, env);
  std::vector<double> delays(s.stages.size());
  for (std::size_t i = 0; i < delays.size(); ++i) delays[i] = stage_delay(s, i, env);

  std::size_t next = 0;
  for (;;) {
    const double stressed_delay = std::accumulate(delays.begin(), delays.end(), 0.0);
    const double diff = fresh_delay - stressed_delay;
    const double trimmed = gate_delay(s.stages[next], env, (s.trim_quanta[next] + 1) * quantum);
    const double step = trimmed - delays[next];
    if (diff < step) break;
    if (out.quanta_added >= budget) {
      fail(ErrorCategory::CalibrationRange,
           "calibration range exceeded: trim budget of " + std::to_string(budget) +
               " quanta exhausted");
    }
    ++s.trim_quanta[next];
    delays[next] = trimmed;
    ++out.quanta_added;
    next = (next + 1) % delays.size();
  }
  return out;
}

void validate(const SensorConfig& c) {
  require(c.stages >= 1 && c.stages % 2 == 1, "sensor stage count must be odd");
  require(c.timer_window > 0.0, "timer_window must be positive");
  require(c.trim_quantum > 0.0, "trim_quantum must be positive");
  require(c.stress_rails.swing() >= c.sense_rails.swing(),
          "stress rails must be at least as wide as sense rails");
  require(c.ripple_amplitude >= 0.0, "ripple amplitude must be >= 0");
}

RecyclingSensor RecyclingSensor::build(const SensorConfig& config, const AgingModelParams& aging,
                                       const RingOscillator& ro_a, const RingOscillator& ro_b,
                                       std::uint32_t chip_id, std::uint64_t seed) {
  validate(config);
  validate(aging);
  RecyclingSensor s;
  s.config_ = config;
  s.aging_ = aging;
  s.chip_id_ = chip_id;
  s.seed_ = seed;
  if (config.calibrated) {
    CalibratedPair pair =
        calibrate(ro_a, ro_b, config.sense_rails, config.trim_quantum, config.trim_budget);
    s.reference_ = std::move(pair.fresh);
    s.stressed_ = std::move(pair.stressed);
    s.quanta_added_ = pair.quanta_added;
  } else {
    // Fixed roles, no trimming.
    s.reference_ = ro_a;
    s.stressed_ = ro_b;
  }
  return s;
}

RecyclingSensor RecyclingSensor::stress(double duration) const {
  require(duration >= 0.0, "stress: duration must be >= 0");
  if (duration == 0.0) return *this;
  RecyclingSensor out = *this;
  EnvCondition rails = config_.stress_rails;
  if (config_.ripple_enabled) {
    const StreamKey key = StreamKey(seed_).derive("ripple").derive(chip_id_).derive(intervals_);
    rails.vdd += config_.ripple_amplitude * (2.0 * key.uniform(0) - 1.0);
    rails.vss += config_.ripple_amplitude * (2.0 * key.uniform(1) - 1.0);
  }
  for (auto& gate : out.stressed_.stages) {
    for (auto& t : gate.transistors) {
      t = accrue_aging(t, rails, duration, aging_, AgingMechanism::Bti, gate.kind);
      t = accrue_aging(t, rails, duration, aging_, AgingMechanism::Hci, gate.kind);
    }
  }
  ++out.intervals_;
  return out;
}

SensorReading RecyclingSensor::sense() const {
  SensorReading r;
  const double window = config_.timer_window;
  r.ref_ticks = static_cast<std::int64_t>(std::floor(window * ro_frequency(reference_, config_.sense_rails)));
  r.stressed_ticks =
      static_cast<std::int64_t>(std::floor(window * ro_frequency(stressed_, config_.sense_rails)));
  r.tick_delta = r.ref_ticks - r.stressed_ticks;
  return r;
}

double RecyclingSensor::delay_difference() const {
  return ro_delay(reference_, config_.sense_rails) - ro_delay(stressed_, config_.sense_rails);
}

std::string sensor_circuit(GateKind kind, int ro_index) {
  return std::string("sensor.") + gate_kind_name(kind) + ".ro" + std::to_string(ro_index);
}

void add_sensor_circuits(DeviceManifest& manifest, GateKind kind, int stages) {
  for (int r = 0; r < 2; ++r)
    manifest.add_circuit(sensor_circuit(kind, r), static_cast<std::uint32_t>(stages),
                         static_cast<std::uint32_t>(device_count(kind)));
}

RingOscillator build_ring_oscillator(const ChipInstance& chip, const std::string& circuit,
                                     GateKind kind, const DeviceConstants& constants,
                                     bool high_vth, int stages, double trim_quantum) {
  std::vector<GateParams> gates;
  gates.reserve(static_cast<std::size_t>(stages));
  const auto n = static_cast<std::uint32_t>(device_count(kind));
  for (int i = 0; i < stages; ++i) {
    const auto shifts = chip.gate_shifts(circuit, static_cast<std::uint32_t>(i), n);
    gates.push_back(make_gate(kind, constants, high_vth, shifts));
  }
  return RingOscillator(std::move(gates), trim_quantum);
}

std::vector<SensorVariant> standard_variants(const SensorConfig& base) {
  SensorConfig inv = base;
  inv.gate_kind = GateKind::Inverter;
  inv.high_vth = false;
  inv.stress_rails = base.sense_rails;

  SensorConfig inv_uncal = inv;
  inv_uncal.calibrated = false;
  SensorConfig inv_cal = inv;
  inv_cal.calibrated = true;
  SensorConfig inv_hvt = inv_cal;
  inv_hvt.high_vth = true;
  SensorConfig st = base;
  st.gate_kind = GateKind::SchmittTrigger;
  st.high_vth = true;
  st.calibrated = true;

  return {{"inv_uncal", inv_uncal},
          {"inv_cal", inv_cal},
          {"inv_hvt_cal", inv_hvt},
          {"st_hvt_cal_boost", st}};
}

SensorVariant find_variant(const SensorConfig& base, const std::string& name) {
  for (auto& v : standard_variants(base))
    if (v.name == name) return v;
  fail(ErrorCategory::Argument, "unknown sensor design variant '" + name + "'");
}

const UsageErrorRate& ErrorRateTable::at_usage(double usage_s) const {
  for (const auto& r : rows)
    if (r.usage_s == usage_s) return r;
  fail(ErrorCategory::Argument, "no error-rate row for usage " + std::to_string(usage_s));
}

ErrorRateTable detection_experiment(const std::vector<ChipInstance>& population,
                                    const SensorModel& model, const SensorVariant& variant,
                                    const std::vector<double>& usages,
                                    const ThresholdPolicy& policy) {
  require(!population.empty(), "detection_experiment: empty population");
  for (double u : usages) require(u > 0.0, "detection_experiment: usages must be positive");
  const SensorConfig& cfg = variant.config;
  validate(cfg);

  ErrorRateTable table;
  table.variant = variant.name;
  std::vector<SensorReading> fresh;
  std::vector<std::vector<SensorReading>> used(usages.size());
  fresh.reserve(population.size());
  for (auto& u : used) u.reserve(population.size());

  for (const auto& chip : population) {
    const RingOscillator a =
        build_ring_oscillator(chip, sensor_circuit(cfg.gate_kind, 0), cfg.gate_kind, model.device,
                              cfg.high_vth, cfg.stages, cfg.trim_quantum);
    const RingOscillator b =
        build_ring_oscillator(chip, sensor_circuit(cfg.gate_kind, 1), cfg.gate_kind, model.device,
                              cfg.high_vth, cfg.stages, cfg.trim_quantum);
    const RecyclingSensor sensor =
        RecyclingSensor::build(cfg, model.aging, a, b, chip.chip_id(), model.seed);
    fresh.push_back(sensor.sense());
    for (std::size_t k = 0; k < usages.size(); ++k) used[k].push_back(sensor.stress(usages[k]).sense());
  }

  if (policy.kind == ThresholdPolicy::Kind::ZeroFalsePositive) {
    table.threshold = std::max_element(fresh.begin(), fresh.end(), [](const auto& x, const auto& y) {
                        return x.tick_delta < y.tick_delta;
                      })->tick_delta;
  } else {
    table.threshold = policy.fixed_threshold;
  }

  auto tally = [&](double usage, const std::vector<SensorReading>& readings) {
    UsageErrorRate row;
    row.usage_s = usage;
    row.total = static_cast<int>(readings.size());
    auto& hist = table.histograms[usage];
    for (std::size_t i = 0; i < readings.size(); ++i) {
      const bool recycled = readings[i].tick_delta > table.threshold;
      // Fresh chips are errors when flagged, used chips when missed.
      if (usage == 0.0 ? recycled : !recycled) ++row.missed;
      ++hist[readings[i].tick_delta];
      table.records.push_back({population[i].chip_id(), usage, readings[i], recycled});
    }
    row.error_rate = static_cast<double>(row.missed) / row.total;
    table.rows.push_back(row);
  };
  tally(0.0, fresh);
  for (std::size_t k = 0; k < usages.size(); ++k) tally(usages[k], used[k]);
  return table;
}

UsageEstimator::UsageEstimator(const SensorModel& model, const SensorConfig& config,
                               std::int64_t threshold)
    : threshold_(threshold) {
  // Zero-variation chip: both ROs nominal, so calibration adds no trim.
  const auto n = device_count(config.gate_kind);
  std::vector<GateParams> gates;
  const std::vector<double> zeros(n, 0.0);
  for (int i = 0; i < config.stages; ++i)
    gates.push_back(make_gate(config.gate_kind, model.device, config.high_vth, zeros));
  const RingOscillator ro(gates, config.trim_quantum);
  const RecyclingSensor sensor = RecyclingSensor::build(config, model.aging, ro, ro);
  const std::int64_t base = sensor.sense().tick_delta;
  for (int k = 0; k <= 200; ++k) {
    const double seconds = std::pow(10.0, -3.0 + 0.05 * k);
    const double delta = static_cast<double>(sensor.stress(seconds).sense().tick_delta - base);
    if (curve_.empty() || delta > curve_.back().first) curve_.emplace_back(delta, seconds);
  }
}

std::optional<double> UsageEstimator::estimate(std::int64_t tick_delta) const {
  if (tick_delta <= threshold_ || curve_.empty()) return std::nullopt;
  const auto d = static_cast<double>(tick_delta - threshold_);
  auto it = std::lower_bound(curve_.begin(), curve_.end(), d,
                             [](const auto& p, double v) { return p.first < v; });
  if (it == curve_.end()) return curve_.back().second;
  if (it == curve_.begin()) return it->second;
  const auto& [d1, t1] = *it;
  const auto& [d0, t0] = *(it - 1);
  const double f = (d - d0) / (d1 - d0);
  return std::exp(std::log(t0) + f * (std::log(t1) - std::log(t0)));
}

}  // namespace stpuf
