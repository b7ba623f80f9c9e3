#include "stpuf/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "stpuf/error.hpp"
#include "stpuf/keyed_rng.hpp"

namespace stpuf {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorCategory::Config, "config: '" + path_ + "' must be an object");
  }

  const json& raw(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) fail(ErrorCategory::Config, "config: missing key '" + where(key) + "'");
    used_.insert(key);
    return *it;
  }

  double num(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(ErrorCategory::Config, "config: '" + where(key) + "' must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(ErrorCategory::Config, "config: '" + where(key) + "' must be an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) fail(ErrorCategory::Config, "config: '" + where(key) + "' must be a boolean");
    return v.get<bool>();
  }

  std::string str(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(ErrorCategory::Config, "config: '" + where(key) + "' must be a string");
    return v.get<std::string>();
  }

  Section child(const std::string& key) { return Section(raw(key), where(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key()))
        fail(ErrorCategory::Config, "config: unknown key '" + where(it.key()) + "'");
    }
  }

 private:
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace

std::vector<double> ExperimentConfig::usage_seconds() const {
  std::vector<double> out;
  for (const auto& u : sensor.usages) out.push_back(parse_duration(u));
  return out;
}

NoiseSpec ExperimentConfig::sram_noise() const {
  NoiseSpec n = sram.noise;
  n.nominal_vdd = sram.nominal_vdd;
  n.reference_temperature = device.reference_temperature;
  return n;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  // Fitted constants; config/default.json carries the fit record.
  c.device = DeviceConstants{};
  c.device.feedback_gain = 0.5625;
  c.aging.bti_prefactor = 1.92102e-4;
  c.aging.bti_time_exponent = 0.2;
  c.aging.bti_voltage_gamma = 2.0;
  c.aging.hci_prefactor = 7.2e-5;
  c.aging.hci_time_exponent = 0.3;
  c.aging.hci_slew_gain = 1.0;
  c.aging.reference_stress_voltage = 1.0;
  c.arbiter.setup_window = 2.625e-13;
  c.sram.latch_strength = 0.022875;
  c.sram.mtj_strength = 0.01625;
  c.variation.master_seed = c.seed;
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.version != kConfigVersion)
    fail(ErrorCategory::Config, "config: unsupported version " + std::to_string(c.version));
  try {
    validate(c.aging);
    validate(c.variation);
    validate(c.sensor.base);
    validate(c.arbiter.noise);
    validate(c.sram_noise());
    require(c.device.alpha >= 1.0 && c.device.alpha <= 2.0, "device.alpha must lie in [1, 2]");
    require(c.device.load_cap > 0.0, "device.load_cap must be positive");
    require(c.device.sensitivity_sweep_max > 0.0, "device.sensitivity_sweep_max must be positive");
    require(c.device.sensitivity_sweep_points >= 2, "device.sensitivity_sweep_points must be >= 2");
    require(c.sensor.histogram_bins >= 1, "sensor.histogram_bins must be >= 1");
    for (double u : c.usage_seconds()) require(u > 0.0, "sensor.usages must be positive");
    require(!c.arbiter.stage_counts.empty(), "arbiter.stage_counts must not be empty");
    for (int s : c.arbiter.stage_counts) require(s >= 1 && s <= 64, "arbiter stage counts must lie in [1, 64]");
    require(c.arbiter.chips >= 2, "arbiter.chips must be >= 2");
    require(c.arbiter.fig5_challenges >= 1, "arbiter.fig5_challenges must be >= 1");
    require(c.arbiter.hd_stages >= 1 && c.arbiter.hd_stages <= 64, "arbiter.hd_stages must lie in [1, 64]");
    require(c.arbiter.hd_challenges >= 1, "arbiter.hd_challenges must be >= 1");
    require(c.arbiter.hd_repeats >= 2, "arbiter.hd_repeats must be >= 2");
    require(c.arbiter.setup_window >= 0.0, "arbiter.setup_window must be >= 0");
    require(c.sram.rows >= 1 && c.sram.cols >= 1, "sram array dimensions must be positive");
    require(c.sram.cycles >= 1, "sram.cycles must be >= 1");
    require(c.sram.vdd_step > 0.0 && c.sram.vdd_max >= c.sram.vdd_min, "sram vdd grid is malformed");
    require(c.sram.latch_strength >= 0.0 && c.sram.mtj_strength >= 0.0, "sram strengths must be >= 0");
    require(c.nist.params.significance > 0.0 && c.nist.params.significance < 1.0,
            "nist.significance must lie in (0, 1)");
    require(c.nist.reference_trials >= 1 && c.nist.reference_bits >= 100, "nist reference settings too small");
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::Config) throw;
    fail(ErrorCategory::Config, std::string("config: ") + e.what());
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Section root(j, "");
  c.version = root.integer("version");
  if (c.version != kConfigVersion)
    fail(ErrorCategory::Config, "config: unsupported version " + std::to_string(c.version));
  {
    const json& s = root.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      fail(ErrorCategory::Config, "config: 'seed' must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  {
    Section d = root.child("device");
    c.device.vth_nominal = d.num("vth_nominal");
    c.device.high_vth_offset = d.num("high_vth_offset");
    c.device.alpha = d.num("alpha");
    c.device.drive_constant = d.num("drive_constant");
    c.device.load_cap = d.num("load_cap");
    c.device.feedback_gain = d.num("feedback_gain");
    c.device.stack_factor = d.num("stack_factor");
    c.device.vth_temp_coeff = d.num("vth_temp_coeff");
    c.device.reference_temperature = d.num("reference_temperature");
    c.device.sensitivity_sweep_max = d.num("sensitivity_sweep_max");
    c.device.sensitivity_sweep_points = d.integer("sensitivity_sweep_points");
    d.finish();
  }
  {
    Section a = root.child("aging");
    c.aging.bti_prefactor = a.num("bti_prefactor");
    c.aging.bti_time_exponent = a.num("bti_time_exponent");
    c.aging.bti_voltage_gamma = a.num("bti_voltage_gamma");
    c.aging.hci_prefactor = a.num("hci_prefactor");
    c.aging.hci_time_exponent = a.num("hci_time_exponent");
    c.aging.hci_slew_gain = a.num("hci_slew_gain");
    c.aging.reference_stress_voltage = a.num("reference_stress_voltage");
    a.finish();
  }
  {
    Section v = root.child("variation");
    c.variation.vth_sigma = v.num("vth_sigma");
    c.variation.vth_mean = v.num("vth_mean");
    c.variation.sample_count = v.integer("sample_count");
    c.variation.master_seed = c.seed;
    v.finish();
  }
  {
    Section s = root.child("sensor");
    SensorConfig& b = c.sensor.base;
    b.stages = s.integer("stages");
    b.stress_rails.vdd = s.num("stress_vdd");
    b.stress_rails.vss = s.num("stress_vss");
    b.sense_rails.vdd = s.num("sense_vdd");
    b.sense_rails.vss = s.num("sense_vss");
    b.stress_rails.temperature = b.sense_rails.temperature = s.num("temperature");
    b.timer_window = s.num("timer_window");
    b.trim_quantum = s.num("trim_quantum");
    const int budget = s.integer("trim_budget");
    if (budget < 0) fail(ErrorCategory::Config, "config: 'sensor.trim_budget' must be >= 0");
    b.trim_budget = static_cast<std::uint32_t>(budget);
    b.ripple_enabled = s.boolean("ripple_enabled");
    b.ripple_amplitude = s.num("ripple_amplitude");
    const json& u = s.raw("usages");
    if (!u.is_array()) fail(ErrorCategory::Config, "config: 'sensor.usages' must be an array");
    c.sensor.usages.clear();
    for (const auto& e : u) {
      if (!e.is_string()) fail(ErrorCategory::Config, "config: 'sensor.usages' entries must be strings");
      c.sensor.usages.push_back(e.get<std::string>());
    }
    c.sensor.histogram_bins = s.integer("histogram_bins");
    s.finish();
  }
  {
    Section a = root.child("arbiter");
    const json& sc = a.raw("stage_counts");
    if (!sc.is_array()) fail(ErrorCategory::Config, "config: 'arbiter.stage_counts' must be an array");
    c.arbiter.stage_counts.clear();
    for (const auto& e : sc) {
      if (!e.is_number_integer()) fail(ErrorCategory::Config, "config: 'arbiter.stage_counts' must hold integers");
      c.arbiter.stage_counts.push_back(e.get<int>());
    }
    c.arbiter.chips = a.integer("chips");
    c.arbiter.fig5_challenges = a.integer("fig5_challenges");
    c.arbiter.hd_stages = a.integer("hd_stages");
    c.arbiter.hd_challenges = a.integer("hd_challenges");
    c.arbiter.hd_repeats = a.integer("hd_repeats");
    c.arbiter.setup_window = a.num("setup_window");
    Section n = a.child("noise");
    c.arbiter.noise.nominal_vdd = n.num("nominal_vdd");
    c.arbiter.noise.vdd_fraction = n.num("vdd_fraction");
    c.arbiter.noise.temp_min = n.num("temp_min");
    c.arbiter.noise.temp_max = n.num("temp_max");
    n.finish();
    a.finish();
  }
  {
    Section s = root.child("sram");
    c.sram.rows = s.integer("rows");
    c.sram.cols = s.integer("cols");
    c.sram.cycles = s.integer("cycles");
    c.sram.vdd_min = s.num("vdd_min");
    c.sram.vdd_max = s.num("vdd_max");
    c.sram.vdd_step = s.num("vdd_step");
    c.sram.comparison_vdd = s.num("comparison_vdd");
    c.sram.nominal_vdd = s.num("nominal_vdd");
    c.sram.temperature = s.num("temperature");
    c.sram.latch_strength = s.num("latch_strength");
    c.sram.mtj_strength = s.num("mtj_strength");
    Section n = s.child("noise");
    c.sram.noise.sigma0 = n.num("sigma0");
    c.sram.noise.voltage_gain = n.num("voltage_gain");
    c.sram.noise.temperature_gain = n.num("temperature_gain");
    n.finish();
    s.finish();
  }
  {
    Section n = root.child("nist");
    c.nist.params.significance = n.num("significance");
    c.nist.params.block_frequency_m = n.integer("block_frequency_m");
    c.nist.params.serial_m = n.integer("serial_m");
    c.nist.params.approximate_entropy_m = n.integer("approximate_entropy_m");
    c.nist.params.template_bits = n.str("template");
    c.nist.params.template_blocks = n.integer("template_blocks");
    c.nist.reference_trials = n.integer("reference_trials");
    c.nist.reference_bits = n.integer("reference_bits");
    n.finish();
  }
  if (j.contains("provenance")) c.provenance = root.raw("provenance");
  root.finish();
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c, bool with_provenance) {
  json j;
  j["version"] = c.version;
  j["seed"] = c.seed;
  j["device"] = {
      {"vth_nominal", c.device.vth_nominal},
      {"high_vth_offset", c.device.high_vth_offset},
      {"alpha", c.device.alpha},
      {"drive_constant", c.device.drive_constant},
      {"load_cap", c.device.load_cap},
      {"feedback_gain", c.device.feedback_gain},
      {"stack_factor", c.device.stack_factor},
      {"vth_temp_coeff", c.device.vth_temp_coeff},
      {"reference_temperature", c.device.reference_temperature},
      {"sensitivity_sweep_max", c.device.sensitivity_sweep_max},
      {"sensitivity_sweep_points", c.device.sensitivity_sweep_points},
  };
  j["aging"] = {
      {"bti_prefactor", c.aging.bti_prefactor},
      {"bti_time_exponent", c.aging.bti_time_exponent},
      {"bti_voltage_gamma", c.aging.bti_voltage_gamma},
      {"hci_prefactor", c.aging.hci_prefactor},
      {"hci_time_exponent", c.aging.hci_time_exponent},
      {"hci_slew_gain", c.aging.hci_slew_gain},
      {"reference_stress_voltage", c.aging.reference_stress_voltage},
  };
  j["variation"] = {
      {"vth_sigma", c.variation.vth_sigma},
      {"vth_mean", c.variation.vth_mean},
      {"sample_count", c.variation.sample_count},
  };
  const SensorConfig& b = c.sensor.base;
  j["sensor"] = {
      {"stages", b.stages},
      {"stress_vdd", b.stress_rails.vdd},
      {"stress_vss", b.stress_rails.vss},
      {"sense_vdd", b.sense_rails.vdd},
      {"sense_vss", b.sense_rails.vss},
      {"temperature", b.sense_rails.temperature},
      {"timer_window", b.timer_window},
      {"trim_quantum", b.trim_quantum},
      {"trim_budget", b.trim_budget},
      {"ripple_enabled", b.ripple_enabled},
      {"ripple_amplitude", b.ripple_amplitude},
      {"usages", c.sensor.usages},
      {"histogram_bins", c.sensor.histogram_bins},
  };
  j["arbiter"] = {
      {"stage_counts", c.arbiter.stage_counts},
      {"chips", c.arbiter.chips},
      {"fig5_challenges", c.arbiter.fig5_challenges},
      {"hd_stages", c.arbiter.hd_stages},
      {"hd_challenges", c.arbiter.hd_challenges},
      {"hd_repeats", c.arbiter.hd_repeats},
      {"setup_window", c.arbiter.setup_window},
      {"noise",
       {{"nominal_vdd", c.arbiter.noise.nominal_vdd},
        {"vdd_fraction", c.arbiter.noise.vdd_fraction},
        {"temp_min", c.arbiter.noise.temp_min},
        {"temp_max", c.arbiter.noise.temp_max}}},
  };
  j["sram"] = {
      {"rows", c.sram.rows},
      {"cols", c.sram.cols},
      {"cycles", c.sram.cycles},
      {"vdd_min", c.sram.vdd_min},
      {"vdd_max", c.sram.vdd_max},
      {"vdd_step", c.sram.vdd_step},
      {"comparison_vdd", c.sram.comparison_vdd},
      {"nominal_vdd", c.sram.nominal_vdd},
      {"temperature", c.sram.temperature},
      {"latch_strength", c.sram.latch_strength},
      {"mtj_strength", c.sram.mtj_strength},
      {"noise",
       {{"sigma0", c.sram.noise.sigma0},
        {"voltage_gain", c.sram.noise.voltage_gain},
        {"temperature_gain", c.sram.noise.temperature_gain}}},
  };
  j["nist"] = {
      {"significance", c.nist.params.significance},
      {"block_frequency_m", c.nist.params.block_frequency_m},
      {"serial_m", c.nist.params.serial_m},
      {"approximate_entropy_m", c.nist.params.approximate_entropy_m},
      {"template", c.nist.params.template_bits},
      {"template_blocks", c.nist.params.template_blocks},
      {"reference_trials", c.nist.reference_trials},
      {"reference_bits", c.nist.reference_bits},
  };
  if (with_provenance && !c.provenance.is_null()) j["provenance"] = c.provenance;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCategory::Io, "cannot open config '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    fail(ErrorCategory::Config, "config '" + path + "': " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    throw Error(e.category(), "config '" + path + "': " + e.what());
  }
}

void save_config(const std::string& path, const ExperimentConfig& c) {
  std::ofstream os(path);
  if (!os) fail(ErrorCategory::Io, "cannot open '" + path + "' for writing");
  os << config_to_json(c).dump(2) << '\n';
  if (!os) fail(ErrorCategory::Io, "write failed for '" + path + "'");
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(c, false).dump())));
  return buf;
}

double parse_duration(const std::string& text) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    fail(ErrorCategory::Argument, "cannot parse duration '" + text + "'");
  }
  const std::string unit = text.substr(pos);
  double scale = 0.0;
  if (unit.empty() || unit == "s") scale = 1.0;
  else if (unit == "ms") scale = 1e-3;
  else if (unit == "min") scale = 60.0;
  else if (unit == "h") scale = 3600.0;
  else if (unit == "day" || unit == "days" || unit == "d") scale = 86400.0;
  else fail(ErrorCategory::Argument, "unknown duration unit in '" + text + "'");
  if (!(value >= 0.0) || !std::isfinite(value))
    fail(ErrorCategory::Argument, "duration '" + text + "' must be a finite non-negative number");
  return value * scale;
}

}  // namespace stpuf
