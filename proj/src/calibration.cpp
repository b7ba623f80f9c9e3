#include "stpuf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "stpuf/error.hpp"
#include "stpuf/experiments.hpp"

namespace stpuf {

using nlohmann::json;

namespace {

const std::vector<double>& anchor_usages() {
  static const std::vector<double> u{0.1, 10.0, 90.0, 900.0, 86400.0};
  return u;
}

std::string usage_label(double u) {
  if (u == 0.1) return "0.1s";
  if (u == 10.0) return "10s";
  if (u == 90.0) return "1.5min";
  if (u == 900.0) return "15min";
  return "1day";
}

// Metric families, each with the config sections it reads. Results are
// cached on those sections so a coordinate move only reruns what it touches.
struct Family {
  std::vector<std::string> sections;
  std::function<std::map<std::string, double>(const ExperimentConfig&)> run;
};

double ratio_or_inf(const std::optional<double>& r) {
  return r ? *r : std::numeric_limits<double>::infinity();
}

const std::map<std::string, Family>& families() {
  static const std::map<std::string, Family> f{
      {"sensitivity",
       {{"device", "sensor"},
        [](const ExperimentConfig& c) {
          return std::map<std::string, double>{{"sensitivity_endpoint", sensitivity_endpoint(c)}};
        }}},
      {"sensor",
       {{"device", "aging", "sensor", "variation", "seed"},
        [](const ExperimentConfig& c) {
          std::map<std::string, double> out;
          const auto pop = sensor_population(c);
          for (const auto& v : standard_variants(c.sensor.base)) {
            const ErrorRateTable t = detection_experiment(pop, sensor_model(c), v, anchor_usages());
            for (double u : anchor_usages())
              out["sensor_" + v.name + "_error_" + usage_label(u)] = t.at_usage(u).error_rate;
          }
          return out;
        }}},
      {"arbiter",
       {{"device", "arbiter", "variation", "seed"},
        [](const ExperimentConfig& c) {
          const HdComparison h = intra_hd_comparison(c);
          std::map<std::string, double> out{{"arbiter_intra_hd_mean_improvement", h.mean_improvement},
                                            {"arbiter_intra_hd_sigma_improvement", h.sigma_improvement}};
          double worst = std::numeric_limits<double>::infinity();
          const auto spreads = delay_spreads(c);
          for (const auto& s : spreads) {
            if (s.kind != GateKind::Inverter) continue;
            for (const auto& t : spreads)
              if (t.kind == GateKind::SchmittTrigger && t.stages == s.stages)
                worst = std::min(worst, t.distribution.std / s.distribution.std);
          }
          out["arbiter_min_spread_ratio"] = worst;
          return out;
        }}},
      {"sram",
       {{"device", "sram", "variation", "seed"},
        [](const ExperimentConfig& c) {
          const SramComparison s = sram_comparison(c, {c.sram.comparison_vdd});
          return std::map<std::string, double>{{"sram_ratio_6t_8t", ratio_or_inf(s.ratio_8t)},
                                               {"sram_ratio_6t_7t", ratio_or_inf(s.ratio_7t)}};
        }}},
  };
  return f;
}

std::string family_of(const std::string& metric) {
  if (metric == "sensitivity_endpoint") return "sensitivity";
  if (metric.rfind("sensor_", 0) == 0) return "sensor";
  if (metric.rfind("arbiter_", 0) == 0) return "arbiter";
  if (metric.rfind("sram_", 0) == 0) return "sram";
  fail(ErrorCategory::Argument, "unknown calibration metric '" + metric + "'");
}

class MetricCache {
 public:
  double get(const std::string& metric, const ExperimentConfig& c) {
    const std::string fam = family_of(metric);
    const Family& f = families().at(fam);
    const json j = config_to_json(c, false);
    std::string key = fam;
    for (const auto& s : f.sections) key += "|" + j.at(s).dump();
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, f.run(c)).first;
    auto m = it->second.find(metric);
    if (m == it->second.end()) fail(ErrorCategory::Argument, "unknown calibration metric '" + metric + "'");
    return m->second;
  }

 private:
  std::map<std::string, std::map<std::string, double>> cache_;
};

json::json_pointer pointer(const std::string& name) {
  std::string p = "/" + name;
  std::replace(p.begin(), p.end(), '.', '/');
  return json::json_pointer(p);
}

// Six significant digits keeps the written config readable and exact.
double tidy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::stod(buf);
}

struct Score {
  double max = 0.0;
  double sum = 0.0;

  bool better_than(const Score& o) const { return max < o.max || (max == o.max && sum < o.sum); }
};

std::vector<TargetOutcome> outcomes(const std::vector<CalibrationTarget>& targets,
                                    const ExperimentConfig& c, MetricCache& cache) {
  std::vector<TargetOutcome> out;
  for (const auto& t : targets) {
    const double v = cache.get(t.name, c);
    out.push_back({t, v, relative_violation(t, v)});
  }
  return out;
}

Score score(const std::vector<TargetOutcome>& o) {
  Score s;
  for (const auto& t : o) {
    s.max = std::max(s.max, t.violation);
    s.sum += t.violation;
  }
  return s;
}

std::vector<double> candidates(const FreeParameter& p, double current, int sweep, int points) {
  double lo = p.lo, hi = p.hi;
  const double shrink = std::ldexp(1.0, -sweep);
  if (p.log_scale) {
    const double span = (std::log(hi) - std::log(lo)) * shrink / 2.0;
    lo = std::max(lo, std::exp(std::log(current) - span));
    hi = std::min(hi, std::exp(std::log(current) + span));
  } else {
    const double span = (hi - lo) * shrink / 2.0;
    lo = std::max(lo, current - span);
    hi = std::min(hi, current + span);
  }
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.5 : static_cast<double>(i) / (points - 1);
    const double v = p.log_scale ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
    out.push_back(tidy(v));
  }
  return out;
}

json outcome_json(const TargetOutcome& o) {
  return {{"name", o.target.name}, {"target", o.target.target}, {"lo", o.target.lo}, {"hi", o.target.hi},
          {"source", o.target.source}, {"achieved", o.achieved}, {"violation", o.violation},
          {"satisfied", o.violation == 0.0}};
}

}  // namespace

const std::vector<std::string>& calibration_metric_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n{"sensitivity_endpoint", "arbiter_intra_hd_mean_improvement",
                               "arbiter_intra_hd_sigma_improvement", "arbiter_min_spread_ratio",
                               "sram_ratio_6t_8t", "sram_ratio_6t_7t"};
    for (const auto& v : {"inv_uncal", "inv_cal", "inv_hvt_cal", "st_hvt_cal_boost"})
      for (double u : anchor_usages()) n.push_back(std::string("sensor_") + v + "_error_" + usage_label(u));
    return n;
  }();
  return names;
}

double calibration_metric(const std::string& name, const ExperimentConfig& c) {
  MetricCache cache;
  return cache.get(name, c);
}

std::vector<CalibrationTarget> default_targets() {
  return {
      {"sensitivity_endpoint", 5.0, 4.8, 5.2, "ST over inverter delay sensitivity at the top of the sweep, about 5x"},
      {"sensor_inv_hvt_cal_error_10s", 0.10, 0.05, 0.15, "high-VTH calibrated inverter sensor misses about 10% at 10 s"},
      {"arbiter_intra_hd_mean_improvement", 0.44, 0.39, 0.49, "ST arbiter lowers mean intra-die HD by about 44%"},
      {"sram_ratio_6t_8t", 4.0, 3.5, 4.5, "8T cell is about 4x more robust than 6T"},
      {"sram_ratio_6t_7t", 2.7, 2.4, 3.0, "7T NV cell is at least 2.3x more robust than 6T at the hardest supply"},
  };
}

std::vector<CalibrationTarget> held_out_checks() {
  return {
      {"sensor_inv_cal_error_1day", 0.0, 0.0, 0.01, "calibrated inverter sensor detects 1 day reliably"},
      {"sensor_inv_cal_error_15min", 0.0, 0.0, 0.0499, "calibrated inverter sensor misses < 5% at 15 min"},
      {"sensor_inv_hvt_cal_error_15min", 0.0, 0.0, 0.0099, "high-VTH inverter sensor misses < 1% at 15 min"},
      {"sensor_st_hvt_cal_boost_error_10s", 0.0, 0.0, 0.0, "boosted ST sensor fully separates 10 s"},
      {"sensor_st_hvt_cal_boost_error_0.1s", 0.0, 0.0, 0.0099, "boosted ST sensor misses < 1% at 0.1 s"},
      {"arbiter_intra_hd_sigma_improvement", 0.10, 0.0, 1.0, "ST arbiter does not widen the intra-die HD spread"},
      {"arbiter_min_spread_ratio", 3.0, 1.0, 1e9, "ST arbiter delay spread exceeds the inverter's"},
  };
}

SearchSpec default_search() {
  SearchSpec s;
  s.parameters = {
      {"device.feedback_gain", 0.0, 2.0, false},
      {"aging.bti_prefactor", 5e-5, 1e-3, true},
      {"arbiter.setup_window", 0.0, 1e-12, false},
      {"sram.latch_strength", 0.0, 0.1, false},
      {"sram.mtj_strength", 0.0, 0.1, false},
  };
  return s;
}

double relative_violation(const CalibrationTarget& t, double value) {
  const double scale = std::max(std::abs(t.target), std::max(std::abs(t.hi - t.lo), 1e-12));
  if (std::isnan(value)) return std::numeric_limits<double>::infinity();
  if (value < t.lo) return (t.lo - value) / scale;
  if (value > t.hi) return (value - t.hi) / scale;
  return 0.0;
}

double get_parameter(const ExperimentConfig& c, const std::string& name) {
  const json j = config_to_json(c, false);
  const auto p = pointer(name);
  if (!j.contains(p) || !j.at(p).is_number())
    fail(ErrorCategory::Argument, "'" + name + "' is not a numeric config constant");
  return j.at(p).get<double>();
}

ExperimentConfig with_parameter(const ExperimentConfig& c, const std::string& name, double value) {
  json j = config_to_json(c, true);
  const auto p = pointer(name);
  if (!j.contains(p) || !j.at(p).is_number_float())
    fail(ErrorCategory::Argument, "'" + name + "' is not a real-valued config constant");
  j[p] = value;
  return config_from_json(j);
}

CalibrationReport calibrate_constants(const ExperimentConfig& start,
                                      const std::vector<CalibrationTarget>& targets,
                                      const SearchSpec& search,
                                      const std::vector<CalibrationTarget>& held_out) {
  validate(start);
  require(search.grid_points >= 2, "calibration grid needs at least 2 points");
  require(search.max_sweeps >= 1, "calibration needs at least one sweep");
  for (const auto& t : targets) {
    require(t.lo <= t.hi, "calibration target '" + t.name + "' has an empty band");
    family_of(t.name);
  }
  for (const auto& p : search.parameters) {
    require(p.lo <= p.hi, "free parameter '" + p.name + "' has empty bounds");
    require(!p.log_scale || p.lo > 0.0, "log-scale parameter '" + p.name + "' needs positive bounds");
    get_parameter(start, p.name);
  }

  MetricCache cache;
  CalibrationReport r;
  r.config = start;
  std::vector<TargetOutcome> current = outcomes(targets, start, cache);
  Score best = score(current);
  r.evaluations = 1;

  for (int sweep = 0; sweep < search.max_sweeps && best.max > 0.0; ++sweep) {
    for (const auto& p : search.parameters) {
      if (best.max == 0.0) break;
      const double now = get_parameter(r.config, p.name);
      ExperimentConfig chosen = r.config;
      bool moved = false;
      for (double v : candidates(p, std::clamp(now, p.lo, p.hi), sweep, search.grid_points)) {
        if (v == now) continue;
        ExperimentConfig trial = with_parameter(r.config, p.name, v);
        std::vector<TargetOutcome> o;
        try {
          o = outcomes(targets, trial, cache);
        } catch (const Error& e) {
          if (e.category() != ErrorCategory::GateStalled && e.category() != ErrorCategory::CalibrationRange) throw;
          continue;  // the model cannot operate there
        }
        ++r.evaluations;
        const Score s = score(o);
        if (s.better_than(best)) {
          best = s;
          chosen = std::move(trial);
          current = std::move(o);
          moved = true;
        }
      }
      if (moved) {
        r.config = std::move(chosen);
        ++r.iterations;
      }
    }
  }

  r.fitted = current;
  r.max_violation = best.max;
  r.held_out = outcomes(held_out, r.config, cache);
  if (best.max > 0.0) {
    json detail{{"parameters", json::object()}, {"targets", json::array()}};
    for (const auto& p : search.parameters) detail["parameters"][p.name] = get_parameter(r.config, p.name);
    for (const auto& o : r.fitted) detail["targets"].push_back(outcome_json(o));
    fail(ErrorCategory::CalibrationInfeasible,
         "calibration infeasible within bounds; best point: " + detail.dump());
  }
  return r;
}

json report_to_json(const CalibrationReport& r, const SearchSpec& search) {
  json params = json::object();
  json bounds = json::array();
  for (const auto& p : search.parameters) {
    params[p.name] = get_parameter(r.config, p.name);
    bounds.push_back({{"name", p.name}, {"lo", p.lo}, {"hi", p.hi}, {"log_scale", p.log_scale}});
  }
  json fitted = json::array(), held = json::array();
  for (const auto& o : r.fitted) fitted.push_back(outcome_json(o));
  for (const auto& o : r.held_out) held.push_back(outcome_json(o));
  return {{"method", "coordinate descent"},
          {"grid_points", search.grid_points},
          {"max_sweeps", search.max_sweeps},
          {"free_parameters", bounds},
          {"fitted_values", params},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"max_violation", r.max_violation},
          {"targets", fitted},
          {"held_out", held}};
}

}  // namespace stpuf
