#include "stpuf/device_models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stpuf/error.hpp"

namespace stpuf {

namespace {

// Shift of a device away from its designed threshold at `temperature`.
double device_shift(const GateParams& g, std::size_t slot, double temperature) {
  const TransistorParams& t = g.transistors[slot];
  return effective_vth(t) - t.designed_vth() +
         g.vth_temp_coeff * (temperature - g.reference_temperature);
}

// Stacked pair plus the contention-weighted feedback device, referenced to
// the designed threshold of the input device. A common shift ΔV moves the
// composite by (2 + η)·ΔV, which is where the ST's aging gain comes from.
double composite_threshold(const GateParams& g, std::size_t first, double temperature) {
  if (g.kind == GateKind::Inverter) {
    return g.transistors[first].designed_vth() + device_shift(g, first, temperature);
  }
  return g.transistors[first].designed_vth() + device_shift(g, first, temperature) +
         device_shift(g, first + 1, temperature) +
         g.feedback_gain * device_shift(g, first + 2, temperature);
}

void check_devices(const GateParams& g, const EnvCondition& env) {
  const double swing = env.swing();
  for (std::size_t i = 0; i < g.transistors.size(); ++i) {
    const double eff = effective_vth(g.transistors[i]);
    if (!(eff > 0.0)) {
      std::ostringstream os;
      os << "device " << i << " has non-positive threshold " << eff << " V";
      fail(ErrorCategory::Argument, os.str());
    }
    const double v = eff + g.vth_temp_coeff * (env.temperature - g.reference_temperature);
    if (!(v < swing)) {
      std::ostringstream os;
      os << "gate stalled: device " << i << " threshold " << v << " V >= swing " << swing << " V";
      fail(ErrorCategory::GateStalled, os.str());
    }
  }
}

double transition_delay(const GateParams& g, double load, double swing, double threshold) {
  const double overdrive = swing - threshold;
  if (!(overdrive > 0.0)) {
    std::ostringstream os;
    os << "gate stalled: composite threshold " << threshold << " V >= swing " << swing << " V";
    fail(ErrorCategory::GateStalled, os.str());
  }
  const double stack = g.kind == GateKind::SchmittTrigger ? g.stack_factor : 1.0;
  return stack * g.drive_constant * load * swing / std::pow(overdrive, g.alpha);
}

}  // namespace

const char* gate_kind_name(GateKind k) noexcept {
  return k == GateKind::Inverter ? "inv" : "st";
}

std::size_t device_count(GateKind k) noexcept {
  return k == GateKind::Inverter ? kInverterDevices : kSchmittDevices;
}

double effective_vth(const TransistorParams& t) noexcept {
  return t.designed_vth() + t.vth_intra + t.vth_aging;
}

void validate(const GateParams& g) {
  require(g.transistors.size() == device_count(g.kind),
          "gate transistor count does not match its kind");
  require(g.load_cap > 0.0, "gate load_cap must be positive");
  require(g.alpha >= 1.0 && g.alpha <= 2.0, "gate alpha must lie in [1, 2]");
  require(g.drive_constant > 0.0, "gate drive_constant must be positive");
  require(g.feedback_gain >= 0.0, "gate feedback_gain must be non-negative");
  require(g.stack_factor > 0.0, "gate stack_factor must be positive");
}

void validate(const AgingModelParams& m) {
  require(m.bti_prefactor >= 0.0 && m.hci_prefactor >= 0.0, "aging prefactors must be >= 0");
  require(m.bti_time_exponent > 0.0 && m.bti_time_exponent < 1.0,
          "bti_time_exponent must lie in (0, 1)");
  require(m.hci_time_exponent > 0.0 && m.hci_time_exponent < 1.0,
          "hci_time_exponent must lie in (0, 1)");
  require(m.hci_slew_gain >= 0.0, "hci_slew_gain must be >= 0");
}

GateParams make_gate(GateKind kind, const DeviceConstants& c, bool high_vth,
                     std::span<const double> intra_shifts) {
  require(intra_shifts.size() == device_count(kind), "make_gate: wrong number of device shifts");
  GateParams g;
  g.kind = kind;
  g.load_cap = c.load_cap;
  g.drive_constant = c.drive_constant;
  g.alpha = c.alpha;
  g.feedback_gain = c.feedback_gain;
  g.stack_factor = c.stack_factor;
  g.vth_temp_coeff = c.vth_temp_coeff;
  g.reference_temperature = c.reference_temperature;
  g.transistors.reserve(intra_shifts.size());
  for (double shift : intra_shifts) {
    TransistorParams t;
    t.vth_nominal = c.vth_nominal;
    t.vth_intra = shift;
    t.is_high_vth = high_vth;
    t.high_vth_offset = c.high_vth_offset;
    g.transistors.push_back(t);
  }
  validate(g);
  return g;
}

double pull_up_threshold(const GateParams& g, double temperature) {
  return composite_threshold(g, 0, temperature);
}

double pull_down_threshold(const GateParams& g, double temperature) {
  return composite_threshold(g, g.kind == GateKind::Inverter ? 1 : 3, temperature);
}

double gate_delay(const GateParams& g, const EnvCondition& env, double extra_load) {
  validate(g);
  require(env.temperature > 0.0, "temperature must be positive");
  require(extra_load >= 0.0, "extra load must be non-negative");
  check_devices(g, env);
  const double swing = env.swing();
  const double load = g.load_cap + extra_load;
  const double rise = transition_delay(g, load, swing, pull_up_threshold(g, env.temperature));
  const double fall = transition_delay(g, load, swing, pull_down_threshold(g, env.temperature));
  return 0.5 * (rise + fall);
}

double sensitivity_ratio(double delta_vth, const EnvCondition& env, const DeviceConstants& c) {
  require(delta_vth >= 0.0, "sensitivity_ratio: delta_vth must be >= 0");
  const double zeros[kSchmittDevices] = {};
  GateParams inv = make_gate(GateKind::Inverter, c, false, std::span(zeros, kInverterDevices));
  GateParams st = make_gate(GateKind::SchmittTrigger, c, false, std::span(zeros, kSchmittDevices));
  const double inv0 = gate_delay(inv, env);
  const double st0 = gate_delay(st, env);
  for (auto& t : inv.transistors) t.vth_aging = delta_vth;
  for (auto& t : st.transistors) t.vth_aging = delta_vth;
  return (gate_delay(st, env) / st0) / (gate_delay(inv, env) / inv0);
}

double aging_shift(const StressHistory& h, const AgingModelParams& m, GateKind host) {
  double bti = 0.0;
  if (h.bti_seconds_by_swing.size() == 1) {
    const auto [swing, seconds] = h.bti_seconds_by_swing.front();
    bti = m.bti_prefactor * std::exp(m.bti_voltage_gamma * (swing - m.reference_stress_voltage)) *
          std::pow(seconds, m.bti_time_exponent);
  } else if (!h.bti_seconds_by_swing.empty()) {
    // Mixed stress voltages: fold into equivalent time at the reference swing.
    double equivalent = 0.0;
    for (const auto& [swing, seconds] : h.bti_seconds_by_swing) {
      equivalent += seconds * std::exp(m.bti_voltage_gamma * (swing - m.reference_stress_voltage) /
                                       m.bti_time_exponent);
    }
    bti = m.bti_prefactor * std::pow(equivalent, m.bti_time_exponent);
  }
  double hci = 0.0;
  if (h.hci_seconds > 0.0) {
    const double slew = host == GateKind::SchmittTrigger ? 1.0 + m.hci_slew_gain : 1.0;
    hci = m.hci_prefactor * slew * std::pow(h.hci_seconds, m.hci_time_exponent);
  }
  return bti + hci;
}

TransistorParams accrue_aging(const TransistorParams& t, const EnvCondition& stress_env,
                              double duration, const AgingModelParams& m,
                              AgingMechanism mechanism, GateKind host) {
  require(duration >= 0.0, "accrue_aging: duration must be >= 0");
  if (duration == 0.0) return t;
  TransistorParams out = t;
  if (mechanism == AgingMechanism::Bti) {
    const double swing = stress_env.swing();
    auto& buckets = out.stress.bti_seconds_by_swing;
    auto it = std::find_if(buckets.begin(), buckets.end(),
                           [swing](const auto& b) { return b.first == swing; });
    if (it == buckets.end()) {
      buckets.emplace_back(swing, duration);
    } else {
      it->second += duration;
    }
  } else {
    out.stress.hci_seconds += duration;
  }
  out.vth_aging = aging_shift(out.stress, m, host);
  return out;
}

}  // namespace stpuf
