#include "stpuf/experiments.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <sodium.h>

#include "stpuf/error.hpp"
#include "stpuf/keyed_rng.hpp"

namespace stpuf {

using nlohmann::json;
namespace fs = std::filesystem;

Moments describe(std::span<const double> values) {
  Moments m;
  m.count = values.size();
  if (values.empty()) return m;
  double sum = 0.0;
  m.min = m.max = values.front();
  for (double v : values) {
    sum += v;
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
  }
  const auto n = static_cast<double>(values.size());
  m.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / (n - 1.0));
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) fail(ErrorCategory::Internal, "format_double failed");
  return std::string(buf, end);
}

namespace {

json moments_json(const Moments& m) {
  return {{"count", m.count}, {"mean", m.mean}, {"std", m.std}, {"min", m.min}, {"max", m.max}};
}

json hd_json(const HdReport& r) {
  return {{"mean", r.mean}, {"sigma", r.sigma}, {"sample_count", r.sample_count},
          {"kind", r.kind == HdKind::Intra ? "intra" : "inter"}};
}

json noise_json(const EnvNoiseSpec& n) {
  return {{"nominal_vdd", n.nominal_vdd}, {"vdd_fraction", n.vdd_fraction},
          {"temp_min", n.temp_min}, {"temp_max", n.temp_max}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header,
            const std::vector<std::string>& columns)
      : path_(path), os_(path, std::ios::binary) {
    if (!os_) fail(ErrorCategory::Io, "cannot open '" + path + "' for writing");
    for (const auto& h : header) os_ << "# " << h << '\n';
    row(columns);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << cells[i];
    }
    os_ << '\n';
  }

  void close() {
    os_.close();
    if (!os_) fail(ErrorCategory::Io, "write failed for '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream os_;
};

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCategory::Io, "cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) fail(ErrorCategory::Io, "write failed for '" + path + "'");
}

std::string str(std::int64_t v) { return std::to_string(v); }

EnvCondition sense_env(const ExperimentConfig& c) { return c.sensor.base.sense_rails; }

EnvCondition arbiter_env(const ExperimentConfig& c) {
  return {c.arbiter.noise.nominal_vdd, 0.0, c.device.reference_temperature};
}

std::uint64_t crp_seed(const ExperimentConfig& c) { return StreamKey(c.seed).derive("crp").value(); }

EnvNoiseSpec quiet_noise(const ExperimentConfig& c) {
  EnvNoiseSpec n = c.arbiter.noise;
  n.vdd_fraction = 0.0;
  n.temp_min = n.temp_max = c.device.reference_temperature;
  return n;
}

std::vector<std::uint32_t> histogram(std::span<const double> v, int bins, double lo, double hi) {
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (double x : v) {
    auto b = width > 0.0 ? static_cast<long>(std::floor((x - lo) / width)) : 0L;
    b = std::clamp(b, 0L, static_cast<long>(bins) - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

void write_histogram(const std::string& path, const std::vector<std::string>& header,
                     std::span<const double> v, int bins) {
  const Moments m = describe(v);
  const auto counts = histogram(v, bins, m.min, m.max);
  const double width = (m.max - m.min) / bins;
  CsvWriter w(path, header, {"bin", "bin_lo_s", "bin_hi_s", "count"});
  for (int b = 0; b < bins; ++b) {
    const double lo = m.min + width * b;
    const double hi = b + 1 == bins ? m.max : m.min + width * (b + 1);
    w.row({std::to_string(b), format_double(lo), format_double(hi),
           std::to_string(counts[static_cast<std::size_t>(b)])});
  }
  w.close();
}

std::map<BitcellKind, std::vector<BitcellParams>> registered_arrays(
    const ExperimentConfig& c, const std::vector<BitcellKind>& kinds, std::uint32_t cells) {
  auto manifest = std::make_shared<DeviceManifest>();
  add_sram_circuit(*manifest, cells);
  VariationSpec v = c.variation;
  v.sample_count = 1;
  const auto chips = sample_population(v, manifest);
  const EnvCondition nominal{c.sram.nominal_vdd, 0.0, c.sram.temperature};
  const StreamKey key = StreamKey(c.seed).derive("sram-register");
  std::map<BitcellKind, std::vector<BitcellParams>> out;
  for (BitcellKind k : kinds) {
    const auto raw = build_sram_array(chips.front(), k, cells, c.sram.latch_strength, c.sram.mtj_strength);
    out[k] = register_array(raw, nominal, c.sram_noise(), key);
  }
  return out;
}

std::optional<double> fault_ratio(const std::vector<FaultReport>& reports, double vdd,
                                  BitcellKind num, BitcellKind den) {
  std::optional<std::uint64_t> a, b;
  for (const auto& r : reports) {
    if (std::abs(r.vdd - vdd) > 1e-9) continue;
    if (r.kind == num) a = r.faults;
    if (r.kind == den) b = r.faults;
  }
  if (!a || !b) fail(ErrorCategory::Argument, "no fault report at vdd " + format_double(vdd));
  if (*b == 0) return std::nullopt;
  return static_cast<double>(*a) / static_cast<double>(*b);
}

void write_fault_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<FaultReport>& reports) {
  CsvWriter w(path, header, {"vdd", "kind", "faults", "cells", "cycles", "fault_rate"});
  for (const auto& r : reports)
    w.row({format_double(r.vdd), bitcell_kind_name(r.kind), std::to_string(r.faults),
           std::to_string(r.cells), std::to_string(r.cycles), format_double(r.fault_rate)});
  w.close();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

// ---- populations ----------------------------------------------------------

SensorModel sensor_model(const ExperimentConfig& c) { return {c.device, c.aging, c.seed}; }

std::vector<ChipInstance> sensor_population(const ExperimentConfig& c) {
  auto manifest = std::make_shared<DeviceManifest>();
  add_sensor_circuits(*manifest, GateKind::Inverter, c.sensor.base.stages);
  add_sensor_circuits(*manifest, GateKind::SchmittTrigger, c.sensor.base.stages);
  return sample_population(c.variation, manifest);
}

std::vector<ChipInstance> arbiter_population(const ExperimentConfig& c, int max_stages) {
  auto manifest = std::make_shared<DeviceManifest>();
  add_arbiter_circuit(*manifest, GateKind::Inverter, max_stages);
  add_arbiter_circuit(*manifest, GateKind::SchmittTrigger, max_stages);
  VariationSpec v = c.variation;
  v.sample_count = c.arbiter.chips;
  return sample_population(v, manifest);
}

std::vector<ArbiterPufInstance> build_arbiters(const ExperimentConfig& c,
                                               const std::vector<ChipInstance>& population,
                                               GateKind kind, int stages) {
  std::vector<ArbiterPufInstance> out;
  out.reserve(population.size());
  for (const auto& chip : population)
    out.push_back(build_arbiter(chip, kind, stages, c.device, c.arbiter.setup_window));
  return out;
}

// ---- recycling sensor -----------------------------------------------------

std::vector<SensitivityPoint> sensitivity_sweep(const ExperimentConfig& c) {
  const int n = c.device.sensitivity_sweep_points;
  const EnvCondition env = sense_env(c);
  const double zeros[kSchmittDevices] = {};
  GateParams inv = make_gate(GateKind::Inverter, c.device, false, std::span(zeros, kInverterDevices));
  GateParams st = make_gate(GateKind::SchmittTrigger, c.device, false, std::span(zeros, kSchmittDevices));
  const double inv0 = gate_delay(inv, env);
  const double st0 = gate_delay(st, env);
  std::vector<SensitivityPoint> out;
  for (int i = 0; i < n; ++i) {
    SensitivityPoint p;
    p.delta_vth = c.device.sensitivity_sweep_max * (static_cast<double>(i) / (n - 1));
    for (auto& t : inv.transistors) t.vth_aging = p.delta_vth;
    for (auto& t : st.transistors) t.vth_aging = p.delta_vth;
    p.inverter_ratio = gate_delay(inv, env) / inv0;
    p.st_ratio = gate_delay(st, env) / st0;
    p.sensitivity = sensitivity_ratio(p.delta_vth, env, c.device);
    out.push_back(p);
  }
  return out;
}

double sensitivity_endpoint(const ExperimentConfig& c) {
  return sensitivity_ratio(c.device.sensitivity_sweep_max, sense_env(c), c.device);
}

CalibrationSpread calibration_spread(const ExperimentConfig& c, const std::vector<ChipInstance>& pop,
                                     const std::string& variant) {
  const SensorConfig cfg = find_variant(c.sensor.base, variant).config;
  const EnvCondition env = cfg.sense_rails;
  CalibrationSpread out;
  out.variant = variant;
  for (const auto& chip : pop) {
    const RingOscillator a = build_ring_oscillator(chip, sensor_circuit(cfg.gate_kind, 0), cfg.gate_kind,
                                                   c.device, cfg.high_vth, cfg.stages, cfg.trim_quantum);
    const RingOscillator b = build_ring_oscillator(chip, sensor_circuit(cfg.gate_kind, 1), cfg.gate_kind,
                                                   c.device, cfg.high_vth, cfg.stages, cfg.trim_quantum);
    out.pre.push_back(ro_delay(a, env) - ro_delay(b, env));
    const CalibratedPair pair = calibrate(a, b, env, cfg.trim_quantum, cfg.trim_budget);
    const double post = ro_delay(pair.fresh, env) - ro_delay(pair.stressed, env);
    out.post.push_back(post);
    out.quanta.push_back(pair.quanta_added);
    if (post < 0.0) ++out.negative_post;
    const std::size_t next = pair.quanta_added % pair.stressed.stages.size();
    const auto& gate = pair.stressed.stages[next];
    const double q = pair.stressed.trim_quanta[next];
    const double step = gate_delay(gate, env, (q + 1) * cfg.trim_quantum) - gate_delay(gate, env, q * cfg.trim_quantum);
    if (!(post < step)) ++out.outside_quantum;
  }
  out.pre_moments = describe(out.pre);
  out.post_moments = describe(out.post);
  return out;
}

ErrorRateTable detection_table(const ExperimentConfig& c, const std::vector<ChipInstance>& pop,
                               const std::string& variant, const std::vector<double>& usages) {
  const SensorVariant v = find_variant(c.sensor.base, variant);
  const SensorModel model = sensor_model(c);
  ErrorRateTable t = detection_experiment(pop, model, v, usages);
  const UsageEstimator estimator(model, v.config, t.threshold);
  for (auto& r : t.records) r.reading.usage_estimate = estimator.estimate(r.reading.tick_delta);
  return t;
}

// ---- arbiter PUF ----------------------------------------------------------

std::vector<Challenge> spread_challenges(const ExperimentConfig& c, int stages) {
  if (stages <= 4) return all_challenges(stages);
  const StreamKey key = StreamKey(c.seed).derive("fig5-challenges").derive(static_cast<std::uint64_t>(stages));
  return random_challenges(stages, c.arbiter.fig5_challenges, key);
}

std::vector<SpreadRow> delay_spreads(const ExperimentConfig& c) {
  const int max_stages = *std::max_element(c.arbiter.stage_counts.begin(), c.arbiter.stage_counts.end());
  const auto pop = arbiter_population(c, max_stages);
  std::vector<SpreadRow> out;
  for (int s : c.arbiter.stage_counts) {
    const auto challenges = spread_challenges(c, s);
    for (GateKind k : {GateKind::Inverter, GateKind::SchmittTrigger}) {
      SpreadRow row;
      row.stages = s;
      row.kind = k;
      row.distribution = delta_distribution(build_arbiters(c, pop, k, s), challenges, arbiter_env(c));
      out.push_back(std::move(row));
    }
  }
  return out;
}

HdComparison intra_hd_comparison(const ExperimentConfig& c) {
  HdComparison out;
  out.noise = c.arbiter.noise;
  out.stages = c.arbiter.hd_stages;
  const auto pop = arbiter_population(c, c.arbiter.hd_stages);
  const std::uint64_t seed = crp_seed(c);
  out.inverter_data = crp_dataset(build_arbiters(c, pop, GateKind::Inverter, out.stages),
                                  c.arbiter.hd_challenges, c.arbiter.hd_repeats, out.noise, seed);
  out.st_data = crp_dataset(build_arbiters(c, pop, GateKind::SchmittTrigger, out.stages),
                            c.arbiter.hd_challenges, c.arbiter.hd_repeats, out.noise, seed);
  out.intra_inverter = intra_hd(out.inverter_data);
  out.intra_st = intra_hd(out.st_data);
  out.inter_inverter = inter_hd(out.inverter_data);
  out.inter_st = inter_hd(out.st_data);
  out.mean_improvement = out.intra_inverter.mean > 0.0
                             ? (out.intra_inverter.mean - out.intra_st.mean) / out.intra_inverter.mean
                             : 0.0;
  out.sigma_improvement = out.intra_inverter.sigma > 0.0
                              ? (out.intra_inverter.sigma - out.intra_st.sigma) / out.intra_inverter.sigma
                              : 0.0;
  return out;
}

// ---- SRAM PUF -------------------------------------------------------------

std::map<BitcellKind, std::vector<BitcellParams>> registered_sram_arrays(const ExperimentConfig& c) {
  return registered_arrays(c, {BitcellKind::SixT, BitcellKind::EightT, BitcellKind::SevenTNV},
                           static_cast<std::uint32_t>(c.sram.rows * c.sram.cols));
}

SramComparison sram_comparison(const ExperimentConfig& c, const std::vector<double>& vdds) {
  SramComparison out;
  const auto arrays = registered_sram_arrays(c);
  out.reports = fault_sweep(arrays, vdds, c.sram.cycles, c.sram_noise(), c.sram.temperature,
                            StreamKey(c.seed).derive("sram-sweep"));
  out.comparison_vdd = c.sram.comparison_vdd;
  const bool covered = std::any_of(vdds.begin(), vdds.end(),
                                   [&](double v) { return std::abs(v - out.comparison_vdd) <= 1e-9; });
  if (covered) {
    out.ratio_8t = fault_ratio(out.reports, out.comparison_vdd, BitcellKind::SixT, BitcellKind::EightT);
    out.ratio_7t = fault_ratio(out.reports, out.comparison_vdd, BitcellKind::SixT, BitcellKind::SevenTNV);
  }
  out.fingerprint = registered_bits(arrays.at(BitcellKind::SixT));
  std::vector<std::uint8_t> bits(out.fingerprint.begin(), out.fingerprint.end());
  out.uniformity = uniformity(bits);
  return out;
}

// ---- NIST -----------------------------------------------------------------

BitVector reference_bitstream(const ExperimentConfig& c, int trial, std::size_t bits) {
  if (sodium_init() < 0) fail(ErrorCategory::Internal, "libsodium initialisation failed");
  const StreamKey key = StreamKey(c.seed).derive("nist-reference").derive(static_cast<std::uint64_t>(trial));
  std::array<unsigned char, randombytes_SEEDBYTES> seed{};
  for (std::size_t i = 0; i < seed.size(); ++i) seed[i] = static_cast<unsigned char>(key.bits(i / 8) >> (8 * (i % 8)));
  std::vector<unsigned char> bytes((bits + 7) / 8);
  randombytes_buf_deterministic(bytes.data(), bytes.size(), seed.data());
  BitVector out(bits);
  for (std::size_t i = 0; i < bits; ++i) out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  return out;
}

std::vector<NistProportion> nist_reference_trials(const ExperimentConfig& c, int trials,
                                                  std::size_t bits) {
  std::vector<NistProportion> out;
  for (int t = 0; t < trials; ++t) {
    const auto rows = nist_suite(reference_bitstream(c, t, bits), c.nist.params);
    if (out.empty())
      for (const auto& r : rows) out.push_back({r.test_name, 0, 0, 0});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ++out[i].trials;
      if (rows[i].pass) ++out[i].passed;
      if (rows[i].insufficient_data) ++out[i].insufficient;
    }
  }
  return out;
}

json nist_to_json(const std::vector<NistResult>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"test", r.test_name}, {"p_value", r.p_value}, {"pass", r.pass},
                   {"insufficient_data", r.insufficient_data}});
  return out;
}

// ---- CSV reading ----------------------------------------------------------

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  fail(ErrorCategory::Argument, "no column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCategory::Io, "cannot open '" + path + "' for reading");
  CsvTable t;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
    } else if (t.columns.empty()) {
      t.columns = split(line, ',');
    } else {
      t.rows.push_back(split(line, ','));
      if (t.rows.back().size() != t.columns.size())
        fail(ErrorCategory::Io, path + ": row " + std::to_string(t.rows.size()) + " has wrong column count");
    }
  }
  return t;
}

// ---- pipelines ------------------------------------------------------------

std::vector<std::string> output_header(const std::string& experiment, const ExperimentConfig& c) {
  return {"experiment=" + experiment + " config_hash=" + config_hash(c) + " seed=" + std::to_string(c.seed)};
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fig1", "fig2b", "fig4a", "fig4b", "fig4c", "fig5", "fig6e", "nist"};
  return names;
}

namespace {

json base_summary(const std::string& name, const ExperimentConfig& c) {
  return {{"experiment", name}, {"config_hash", config_hash(c)}, {"seed", c.seed}};
}

void run_fig1(const ExperimentConfig& c, const fs::path& dir, ExperimentResult& r) {
  const auto header = output_header("fig1", c);
  const std::string variant = "st_hvt_cal_boost";
  const CalibrationSpread s = calibration_spread(c, sensor_population(c), variant);
  const auto pop_ids = [&] {
    std::vector<std::uint32_t> ids;
    for (std::size_t i = 0; i < s.pre.size(); ++i) ids.push_back(static_cast<std::uint32_t>(i));
    return ids;
  }();

  const std::string diffs = (dir / "fig1_delay_differences.csv").string();
  CsvWriter w(diffs, header, {"chip_id", "pre_s", "post_s", "quanta_added"});
  for (std::size_t i = 0; i < s.pre.size(); ++i)
    w.row({std::to_string(pop_ids[i]), format_double(s.pre[i]), format_double(s.post[i]),
           std::to_string(s.quanta[i])});
  w.close();
  const std::string pre = (dir / "fig1_pre_histogram.csv").string();
  const std::string post = (dir / "fig1_post_histogram.csv").string();
  write_histogram(pre, header, s.pre, c.sensor.histogram_bins);
  write_histogram(post, header, s.post, c.sensor.histogram_bins);
  r.files = {diffs, pre, post};
  r.summary["variant"] = variant;
  r.summary["pre"] = moments_json(s.pre_moments);
  r.summary["post"] = moments_json(s.post_moments);
  r.summary["negative_post"] = s.negative_post;
  r.summary["outside_quantum"] = s.outside_quantum;
}

void run_fig2b(const ExperimentConfig& c, const fs::path& dir, ExperimentResult& r) {
  const auto sweep = sensitivity_sweep(c);
  const std::string path = (dir / "fig2b_sensitivity.csv").string();
  CsvWriter w(path, output_header("fig2b", c), {"delta_vth_v", "inverter_ratio", "st_ratio", "sensitivity"});
  bool monotone = true;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& p = sweep[i];
    w.row({format_double(p.delta_vth), format_double(p.inverter_ratio), format_double(p.st_ratio),
           format_double(p.sensitivity)});
    if (i && p.sensitivity < sweep[i - 1].sensitivity) monotone = false;
  }
  w.close();
  r.files = {path};
  r.summary["sweep_max_v"] = c.device.sensitivity_sweep_max;
  r.summary["sweep_points"] = sweep.size();
  r.summary["endpoint_sensitivity"] = sweep.back().sensitivity;
  r.summary["monotone"] = monotone;
}

void write_detection_files(const ExperimentConfig& c, const std::string& fig, const ErrorRateTable& t,
                           const fs::path& dir, ExperimentResult& r) {
  const auto header = output_header(fig, c);
  const std::string readings = (dir / (fig + "_" + t.variant + "_readings.csv")).string();
  CsvWriter w(readings, header,
              {"chip_id", "design_variant", "usage_s", "ref_ticks", "stressed_ticks", "tick_delta",
               "classified", "usage_estimate_s"});
  for (const auto& rec : t.records)
    w.row({std::to_string(rec.chip_id), t.variant, format_double(rec.usage_s), str(rec.reading.ref_ticks),
           str(rec.reading.stressed_ticks), str(rec.reading.tick_delta), rec.classified ? "1" : "0",
           rec.reading.usage_estimate ? format_double(*rec.reading.usage_estimate) : ""});
  w.close();
  const std::string hist = (dir / (fig + "_" + t.variant + "_histogram.csv")).string();
  CsvWriter h(hist, header, {"design_variant", "usage_s", "tick_delta", "count"});
  for (const auto& [usage, counts] : t.histograms)
    for (const auto& [delta, n] : counts) h.row({t.variant, format_double(usage), str(delta), std::to_string(n)});
  h.close();
  r.files.push_back(readings);
  r.files.push_back(hist);
}

json table_json(const ErrorRateTable& t) {
  json rows = json::array();
  for (const auto& row : t.rows)
    rows.push_back({{"usage_s", row.usage_s}, {"missed", row.missed}, {"total", row.total},
                    {"error_rate", row.error_rate}});
  return {{"variant", t.variant}, {"threshold", t.threshold}, {"rows", rows}};
}

void run_fig4(const std::string& fig, const std::vector<std::string>& variants, const ExperimentConfig& c,
              const fs::path& dir, ExperimentResult& r) {
  const auto pop = sensor_population(c);
  const auto usages = c.usage_seconds();
  const std::string rates = (dir / (fig + "_error_rates.csv")).string();
  CsvWriter w(rates, output_header(fig, c), {"design_variant", "threshold", "usage_s", "missed", "total", "error_rate"});
  json tables = json::array();
  for (const auto& v : variants) {
    const ErrorRateTable t = detection_table(c, pop, v, usages);
    for (const auto& row : t.rows)
      w.row({v, str(t.threshold), format_double(row.usage_s), std::to_string(row.missed),
             std::to_string(row.total), format_double(row.error_rate)});
    write_detection_files(c, fig, t, dir, r);
    tables.push_back(table_json(t));
  }
  w.close();
  r.files.insert(r.files.begin(), rates);
  r.summary["usages"] = c.sensor.usages;
  r.summary["designs"] = tables;
}

void run_fig5(const ExperimentConfig& c, const fs::path& dir, ExperimentResult& r) {
  const auto header = output_header("fig5", c);
  json spreads = json::array();
  for (const auto& row : delay_spreads(c)) {
    const std::string kind = gate_kind_name(row.kind);
    const std::string path = (dir / ("fig5_deltas_" + kind + "_" + std::to_string(row.stages) + ".csv")).string();
    const auto challenges = spread_challenges(c, row.stages);
    CsvWriter w(path, header, {"chip_id", "challenge", "raw_delta_s"});
    std::size_t i = 0;
    for (std::uint32_t chip = 0; chip < static_cast<std::uint32_t>(c.arbiter.chips); ++chip)
      for (const auto& ch : challenges)
        w.row({std::to_string(chip), challenge_to_hex(ch), format_double(row.distribution.samples[i++])});
    w.close();
    r.files.push_back(path);
    const Moments m = describe(row.distribution.samples);
    spreads.push_back({{"kind", kind}, {"stages", row.stages}, {"challenges", challenges.size()},
                       {"moments", moments_json(m)},
                       {"fraction_positive", row.distribution.fraction_positive}});
  }
  r.summary["spreads"] = spreads;

  const HdComparison hd = intra_hd_comparison(c);
  for (const auto& [kind, data] : {std::pair{"inv", &hd.inverter_data}, std::pair{"st", &hd.st_data}}) {
    const std::string path = (dir / (std::string("fig5_crps_") + kind + ".txt")).string();
    write_crp_dataset_file(path, *data, header);
    r.files.push_back(path);
  }
  r.summary["intra_hd"] = {
      {"stages", hd.stages},
      {"challenges", c.arbiter.hd_challenges},
      {"repeats", c.arbiter.hd_repeats},
      {"noise", noise_json(hd.noise)},
      {"setup_window_s", c.arbiter.setup_window},
      {"inverter", hd_json(hd.intra_inverter)},
      {"st", hd_json(hd.intra_st)},
      {"inter_inverter", hd_json(hd.inter_inverter)},
      {"inter_st", hd_json(hd.inter_st)},
      {"mean_improvement", hd.mean_improvement},
      {"sigma_improvement", hd.sigma_improvement},
  };
}

void run_fig6e(const ExperimentConfig& c, const fs::path& dir, ExperimentResult& r) {
  const auto grid = vdd_grid(c.sram.vdd_min, c.sram.vdd_max, c.sram.vdd_step);
  const SramComparison s = sram_comparison(c, grid);
  const std::string faults = (dir / "fig6e_faults.csv").string();
  write_fault_csv(faults, output_header("fig6e", c), s.reports);
  const std::string bits = (dir / "fig6e_fingerprint_6t.bin").string();
  std::vector<std::uint8_t> fp(s.fingerprint.begin(), s.fingerprint.end());
  write_bit_file(bits, fp);
  r.files = {faults, bits};
  json ratios = json::array();
  for (double v : grid)
    ratios.push_back({{"vdd", v},
                      {"ratio_6t_8t", optional_json(fault_ratio(s.reports, v, BitcellKind::SixT, BitcellKind::EightT))},
                      {"ratio_6t_7t", optional_json(fault_ratio(s.reports, v, BitcellKind::SixT, BitcellKind::SevenTNV))}});
  r.summary["array"] = std::to_string(c.sram.rows) + "x" + std::to_string(c.sram.cols);
  r.summary["cycles"] = c.sram.cycles;
  r.summary["comparison_vdd"] = s.comparison_vdd;
  r.summary["ratio_6t_8t"] = optional_json(s.ratio_8t);
  r.summary["ratio_6t_7t"] = optional_json(s.ratio_7t);
  r.summary["ratios_by_vdd"] = ratios;
  r.summary["uniformity_6t"] = s.uniformity;
}

void run_nist(const ExperimentConfig& c, const fs::path& dir, ExperimentResult& r) {
  const auto header = output_header("nist", c);
  const auto props = nist_reference_trials(c, c.nist.reference_trials,
                                           static_cast<std::size_t>(c.nist.reference_bits));
  const std::string ref = (dir / "nist_reference.csv").string();
  CsvWriter w(ref, header, {"test_name", "passed", "trials", "insufficient"});
  json rows = json::array();
  for (const auto& p : props) {
    w.row({p.test_name, std::to_string(p.passed), std::to_string(p.trials), std::to_string(p.insufficient)});
    rows.push_back({{"test", p.test_name}, {"passed", p.passed}, {"trials", p.trials}});
  }
  w.close();

  // Noise-free responses of the largest arbiter configuration.
  const int stages = *std::max_element(c.arbiter.stage_counts.begin(), c.arbiter.stage_counts.end());
  const auto pop = arbiter_population(c, stages);
  const std::string puf = (dir / "nist_puf.csv").string();
  CsvWriter p(puf, header, {"source", "bits", "test_name", "p_value", "pass", "insufficient"});
  json puf_rows = json::object();
  for (GateKind k : {GateKind::Inverter, GateKind::SchmittTrigger}) {
    const CrpDataset d = crp_dataset(build_arbiters(c, pop, k, stages), c.arbiter.fig5_challenges, 2,
                                     quiet_noise(c), crp_seed(c));
    const BitVector bits = response_bitstream(d);
    const auto results = nist_suite(bits, c.nist.params);
    int passed = 0;
    for (const auto& res : results) {
      p.row({gate_kind_name(k), std::to_string(bits.size()), res.test_name, format_double(res.p_value),
             res.pass ? "1" : "0", res.insufficient_data ? "1" : "0"});
      passed += res.pass;
    }
    puf_rows[gate_kind_name(k)] = {{"bits", bits.size()}, {"rows_passed", passed}, {"rows", nist_to_json(results)}};
  }
  p.close();
  r.files = {ref, puf};
  r.summary["reference"] = {{"trials", c.nist.reference_trials}, {"bits", c.nist.reference_bits}, {"rows", rows}};
  r.summary["arbiter_responses"] = puf_rows;
}

}  // namespace

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& c,
                                const std::string& out_dir) {
  validate(c);
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    fail(ErrorCategory::Argument, "unknown experiment '" + name + "'");
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCategory::Io, "cannot create output directory '" + out_dir + "': " + ec.message());

  ExperimentResult r;
  r.name = name;
  r.summary = base_summary(name, c);
  try {
    if (name == "fig1") run_fig1(c, dir, r);
    else if (name == "fig2b") run_fig2b(c, dir, r);
    else if (name == "fig4a") run_fig4(name, {"inv_uncal", "inv_cal"}, c, dir, r);
    else if (name == "fig4b") run_fig4(name, {"inv_hvt_cal"}, c, dir, r);
    else if (name == "fig4c") run_fig4(name, {"st_hvt_cal_boost"}, c, dir, r);
    else if (name == "fig5") run_fig5(c, dir, r);
    else if (name == "fig6e") run_fig6e(c, dir, r);
    else run_nist(c, dir, r);
  } catch (const Error& e) {
    throw Error(e.category(), "experiment " + name + ": " + e.what());
  }
  const std::string summary = (dir / (name + "_summary.json")).string();
  write_json(summary, r.summary);
  r.files.push_back(summary);
  return r;
}

// ---- command helpers ------------------------------------------------------

json sensor_sim(const ExperimentConfig& c, const SensorSimOptions& o) {
  validate(c);
  require(!o.out.empty(), "sensor-sim: an output path is required");
  std::vector<double> usages;
  std::vector<std::string> labels = o.usages.empty() ? c.sensor.usages : o.usages;
  for (const auto& u : labels) usages.push_back(parse_duration(u));
  std::vector<std::string> variants = o.variants;
  if (variants.empty())
    for (const auto& v : standard_variants(c.sensor.base)) variants.push_back(v.name);

  const auto pop = sensor_population(c);
  const auto header = output_header("sensor-sim", c);
  CsvWriter w(o.out, header,
              {"chip_id", "design_variant", "usage_s", "ref_ticks", "stressed_ticks", "tick_delta",
               "classified", "usage_estimate_s"});
  std::unique_ptr<CsvWriter> h;
  if (!o.histogram_out.empty())
    h = std::make_unique<CsvWriter>(o.histogram_out, header,
                                    std::vector<std::string>{"design_variant", "usage_s", "tick_delta", "count"});
  json designs = json::array();
  for (const auto& v : variants) {
    const ErrorRateTable t = detection_table(c, pop, v, usages);
    for (const auto& rec : t.records)
      w.row({std::to_string(rec.chip_id), v, format_double(rec.usage_s), str(rec.reading.ref_ticks),
             str(rec.reading.stressed_ticks), str(rec.reading.tick_delta), rec.classified ? "1" : "0",
             rec.reading.usage_estimate ? format_double(*rec.reading.usage_estimate) : ""});
    if (h)
      for (const auto& [usage, counts] : t.histograms)
        for (const auto& [delta, n] : counts) h->row({v, format_double(usage), str(delta), std::to_string(n)});
    designs.push_back(table_json(t));
  }
  w.close();
  if (h) h->close();
  return {{"command", "sensor-sim"}, {"config_hash", config_hash(c)}, {"usages", labels}, {"designs", designs}};
}

json arbiter_sim(const ExperimentConfig& c, const ArbiterSimOptions& o) {
  validate(c);
  require(!o.out.empty(), "arbiter-sim: an output path is required");
  require(o.stages >= 1 && o.stages <= 64, "arbiter-sim: stages must lie in [1, 64]");
  require(o.chips >= 2, "arbiter-sim: at least two chips are required");
  ExperimentConfig cc = c;
  cc.arbiter.chips = o.chips;
  const auto pop = arbiter_population(cc, o.stages);
  const EnvNoiseSpec noise = o.noise ? c.arbiter.noise : quiet_noise(c);
  const CrpDataset d = crp_dataset(build_arbiters(c, pop, o.kind, o.stages), o.challenges, o.repeats, noise, crp_seed(c));
  auto header = output_header("arbiter-sim", c);
  header.push_back(std::string("kind=") + gate_kind_name(o.kind) + " chips=" + std::to_string(o.chips) +
                   " challenges=" + std::to_string(o.challenges) + " repeats=" + std::to_string(o.repeats) +
                   " noise=" + (o.noise ? "on" : "off"));
  write_crp_dataset_file(o.out, d, header);
  const BitVector bits = response_bitstream(d);
  return {{"command", "arbiter-sim"}, {"config_hash", config_hash(c)}, {"kind", gate_kind_name(o.kind)},
          {"stages", o.stages}, {"chips", o.chips}, {"challenges", o.challenges}, {"repeats", o.repeats},
          {"noise", o.noise ? noise_json(noise) : json(nullptr)},
          {"intra_hd", hd_json(intra_hd(d))}, {"inter_hd", hd_json(inter_hd(d))},
          {"uniformity", uniformity(bits)}};
}

json sram_sim(const ExperimentConfig& c, const SramSimOptions& o) {
  validate(c);
  require(!o.out.empty(), "sram-sim: an output path is required");
  require(o.rows >= 1 && o.cols >= 1, "sram-sim: array dimensions must be positive");
  std::vector<BitcellKind> kinds = o.kinds;
  if (kinds.empty()) kinds = {BitcellKind::SixT, BitcellKind::EightT, BitcellKind::SevenTNV};
  const auto arrays = registered_arrays(c, kinds, static_cast<std::uint32_t>(o.rows * o.cols));
  const auto grid = vdd_grid(o.vdd_lo, o.vdd_hi, o.vdd_step);
  const auto reports = fault_sweep(arrays, grid, o.cycles, c.sram_noise(), c.sram.temperature,
                                   StreamKey(c.seed).derive("sram-sweep"));
  auto header = output_header("sram-sim", c);
  header.push_back("array=" + std::to_string(o.rows) + "x" + std::to_string(o.cols) +
                   " cycles=" + std::to_string(o.cycles));
  write_fault_csv(o.out, header, reports);
  const auto bits = registered_bits(arrays.begin()->second);
  std::vector<std::uint8_t> fp(bits.begin(), bits.end());
  if (!o.fingerprint_out.empty()) write_bit_file(o.fingerprint_out, fp);
  json rows = json::array();
  for (const auto& r : reports)
    rows.push_back({{"vdd", r.vdd}, {"kind", bitcell_kind_name(r.kind)}, {"faults", r.faults},
                    {"fault_rate", r.fault_rate}});
  return {{"command", "sram-sim"}, {"config_hash", config_hash(c)}, {"rows", rows},
          {"uniformity", uniformity(fp)}, {"fingerprint_kind", bitcell_kind_name(arrays.begin()->first)}};
}

json metrics_report(const ExperimentConfig& c, const std::string& in, bool bit_file,
                    const std::string& report_out) {
  json report{{"command", "metrics"}, {"input", in}};
  BitVector bits;
  if (bit_file) {
    bits = read_bit_file(in);
  } else {
    const CrpDataset d = read_crp_dataset_file(in);
    const auto grouped = responses_by_chip(d);
    bool repeats = !grouped.empty();
    for (const auto& [chip, reps] : grouped) repeats = repeats && reps.size() >= 2;
    report["chips"] = grouped.size();
    report["stages"] = d.stages;
    report["challenges"] = d.challenges.size();
    report["intra_hd"] = repeats ? hd_json(intra_hd(d)) : json(nullptr);
    report["inter_hd"] = grouped.size() >= 2 ? hd_json(inter_hd(d)) : json(nullptr);
    bits = response_bitstream(d);
  }
  require(!bits.empty(), "metrics: input holds no response bits");
  report["bits"] = bits.size();
  report["uniformity"] = uniformity(bits);
  report["nist"] = nist_to_json(nist_suite(bits, c.nist.params));
  if (!report_out.empty()) write_json(report_out, report);
  return report;
}

}  // namespace stpuf
