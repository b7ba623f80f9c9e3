#include "stpuf/keyed_rng.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "stpuf/error.hpp"

namespace stpuf {

double StreamKey::uniform(std::uint64_t counter) const noexcept {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double StreamKey::normal(std::uint64_t counter) const { return normal_quantile(uniform(counter)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCategory::Argument, "normal_quantile: p must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Argument: return "argument";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::GateStalled: return "gate_stalled";
    case ErrorCategory::CalibrationRange: return "calibration_range_exceeded";
    case ErrorCategory::CalibrationInfeasible: return "calibration_infeasible";
    case ErrorCategory::Protocol: return "protocol";
    case ErrorCategory::Internal: return "internal";
  }
  return "internal";
}

}  // namespace stpuf
