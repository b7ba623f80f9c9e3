#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stpuf/config.hpp"

namespace stpuf {

struct CalibrationTarget {
  std::string name;  // a metric understood by calibration_metric()
  double target = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::string source;
};

// `name` is a dotted config path such as "device.feedback_gain".
struct FreeParameter {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
};

struct SearchSpec {
  std::vector<FreeParameter> parameters;
  int grid_points = 9;
  int max_sweeps = 6;
};

struct TargetOutcome {
  CalibrationTarget target;
  double achieved = 0.0;
  double violation = 0.0;  // relative distance outside the band, 0 inside
};

struct CalibrationReport {
  ExperimentConfig config;
  int iterations = 0;   // accepted parameter moves
  int evaluations = 0;  // distinct configurations scored
  double max_violation = 0.0;
  std::vector<TargetOutcome> fitted;
  std::vector<TargetOutcome> held_out;
};

// Metrics that targets may name. Each is deterministic in the config.
const std::vector<std::string>& calibration_metric_names();
double calibration_metric(const std::string& name, const ExperimentConfig& c);

std::vector<CalibrationTarget> default_targets();
std::vector<CalibrationTarget> held_out_checks();
SearchSpec default_search();

double relative_violation(const CalibrationTarget& t, double value);

double get_parameter(const ExperimentConfig& c, const std::string& name);
ExperimentConfig with_parameter(const ExperimentConfig& c, const std::string& name, double value);

// Coordinate descent over the free parameters, minimising the largest
// relative band violation (ties broken by the summed violation, then by
// keeping the current value). Returns as soon as every band is met; a start
// point that already satisfies the targets comes back unchanged with zero
// iterations. Throws CalibrationInfeasible when the sweeps run out.
CalibrationReport calibrate_constants(const ExperimentConfig& start,
                                      const std::vector<CalibrationTarget>& targets,
                                      const SearchSpec& search,
                                      const std::vector<CalibrationTarget>& held_out = {});

nlohmann::json report_to_json(const CalibrationReport& r, const SearchSpec& search);

}  // namespace stpuf
