#pragma once

#include <span>
#include <utility>
#include <vector>

namespace stpuf {

enum class GateKind { Inverter, SchmittTrigger };
enum class AgingMechanism { Bti, Hci };

const char* gate_kind_name(GateKind k) noexcept;

// Transistor slots inside a gate. Inverter: {P0, N0}. Schmitt trigger:
// {P0, P1, P2, N0, N1, N2}; P0/P1 and N0/N1 are the stacked pairs, P2/N2
// the feedback devices.
inline constexpr std::size_t kInverterDevices = 2;
inline constexpr std::size_t kSchmittDevices = 6;

std::size_t device_count(GateKind k) noexcept;

// Cumulative stress seen by one transistor. Aging is always recomputed from
// these totals so that splitting a stress interval gives the same shift as
// applying it in one piece.
struct StressHistory {
  std::vector<std::pair<double, double>> bti_seconds_by_swing;  // (V_sw, seconds)
  double hci_seconds = 0.0;

  bool empty() const noexcept { return bti_seconds_by_swing.empty() && hci_seconds == 0.0; }
};

struct TransistorParams {
  double vth_nominal = 0.0;
  double vth_intra = 0.0;
  double vth_aging = 0.0;  // derived from `stress` once any aging is accrued
  bool is_high_vth = false;
  double high_vth_offset = 0.300;
  StressHistory stress;

  // Threshold the device was designed for, before any variation or aging.
  double designed_vth() const noexcept {
    return vth_nominal + (is_high_vth ? high_vth_offset : 0.0);
  }
};

double effective_vth(const TransistorParams& t) noexcept;

struct EnvCondition {
  double vdd = 1.0;
  double vss = 0.0;
  double temperature = 298.0;  // kelvin

  double swing() const noexcept { return vdd - vss; }
};

struct GateParams {
  GateKind kind = GateKind::Inverter;
  std::vector<TransistorParams> transistors;
  double load_cap = 1e-15;         // F
  double drive_constant = 6290.0;  // s·V^(alpha-1)/F
  double alpha = 1.3;
  double feedback_gain = 0.5;      // contention weight of P2/N2
  double stack_factor = 2.0;       // drive derating of the two-high stack
  double vth_temp_coeff = -1e-3;   // V/K
  double reference_temperature = 298.0;
};

// Throws Argument if the gate is malformed.
void validate(const GateParams& g);

struct AgingModelParams {
  double bti_prefactor = 0.0;        // V at 1 s of stress at the reference swing
  double bti_time_exponent = 0.2;
  double bti_voltage_gamma = 2.0;    // 1/V
  double hci_prefactor = 0.0;        // V at 1 s
  double hci_time_exponent = 0.3;
  double hci_slew_gain = 1.0;        // extra HCI for Schmitt-trigger hosts
  double reference_stress_voltage = 1.0;
};

void validate(const AgingModelParams& m);

// Constants shared by every gate the engine builds.
struct DeviceConstants {
  double vth_nominal = 0.3;
  double high_vth_offset = 0.3;
  double alpha = 1.3;
  double drive_constant = 6290.0;
  double load_cap = 1e-15;
  double feedback_gain = 0.5;
  double stack_factor = 2.0;
  double vth_temp_coeff = -1e-3;
  double reference_temperature = 298.0;
  double sensitivity_sweep_max = 0.22;  // top of the ΔV_TH sweep, V
  int sensitivity_sweep_points = 50;
};

// Builds a gate of `kind` whose devices carry the given intra-die shifts
// (one per device slot, in slot order).
GateParams make_gate(GateKind kind, const DeviceConstants& c, bool high_vth,
                     std::span<const double> intra_shifts);

// Composite switching threshold of the pull-up (rising output) or pull-down
// network at temperature `temperature`.
double pull_up_threshold(const GateParams& g, double temperature);
double pull_down_threshold(const GateParams& g, double temperature);

// Mean of rise and fall delay, seconds. `extra_load` is added to load_cap.
// Throws GateStalled when the swing does not exceed a composite threshold.
double gate_delay(const GateParams& g, const EnvCondition& env, double extra_load = 0.0);

// [d_ST(ΔV)/d_ST(0)] / [d_inv(ΔV)/d_inv(0)] for nominal gates.
double sensitivity_ratio(double delta_vth, const EnvCondition& env, const DeviceConstants& c);

// Shift implied by a stress history.
double aging_shift(const StressHistory& h, const AgingModelParams& m, GateKind host);

TransistorParams accrue_aging(const TransistorParams& t, const EnvCondition& stress_env,
                              double duration, const AgingModelParams& m,
                              AgingMechanism mechanism, GateKind host);

}  // namespace stpuf
