#pragma once

// Capacitor voltage dynamics for a batteryless node: an ideal current source
// with parallel resistance r_h (the harvester) charging a capacitor that feeds
// a resistive load. Between state changes the capacitor voltage follows
//
//   v(t) = I * R_eq * (1 - exp(-t / (R_eq C))) + V0 * exp(-t / (R_eq C))
//
// with R_eq the parallel combination of load and harvester resistances.

#include <vector>

namespace ehsched {

struct CircuitParams {
  double capacitance_farads = 4.7e-3;
  double v_min = 1.8;
  double v_max = 3.3;
  double v_init = 2.2;
  double operating_voltage = 3.3;  // E, used to turn a current draw into R_L
  double sleep_current_amps = 1e-4;
  double turn_on_current_amps = 3e-3;
  double turn_on_time_seconds = 0.1;

  /// Throws InvalidParameter naming the first violated invariant. v_init may
  /// sit below v_min (a discharged capacitor); the device then starts off.
  void validate() const;

  bool operator==(const CircuitParams&) const = default;
};

struct HarvestSegment {
  double start_time = 0.0;  // seconds
  double power_watts = 0.0;
  bool operator==(const HarvestSegment&) const = default;
};

/// Piecewise-constant harvested power. Each segment holds from its start
/// time (inclusive) until the next segment; the last one extends past the horizon.
struct HarvesterProfile {
  std::vector<HarvestSegment> segments;
  double horizon = 0.0;

  static HarvesterProfile constant(double power_watts, double horizon);
  double power_at(double time) const;
  void validate() const;

  bool operator==(const HarvesterProfile&) const = default;
};

/// Harvester as a real current source: I in parallel with r_h.
/// A harvester producing no power has r_h = +inf and I = 0.
struct HarvesterSource {
  double resistance_ohms;
  double current_amps;

  static HarvesterSource none();
  bool harvesting() const { return current_amps > 0.0; }
};

struct CircuitState {
  double source_current_amps;
  double harvest_resistance_ohms;
  double load_resistance_ohms;
  double equivalent_resistance_ohms;
};

/// r_h = v_max^2 / power, I = v_max / r_h. Rejects non-positive arguments.
HarvesterSource harvester_params(double v_max, double power_watts);

/// Same as harvester_params but maps power == 0 to HarvesterSource::none().
HarvesterSource harvester_for_power(double v_max, double power_watts);

/// Circuit with a load drawing `load_current` at operating voltage `e_volts`.
CircuitState load_equivalent(double e_volts, double load_current_amps, const HarvesterSource& source);

/// Load disconnected (device off): R_eq = r_h.
CircuitState open_load(const HarvesterSource& source);

/// Affine map V -> gain + V * decay for one fixed-state interval.
/// Every voltage computation in the library goes through this so that
/// independent recomputations agree to the last bit.
struct StepMap {
  double gain = 0.0;
  double decay = 1.0;

  double apply(double v0) const { return gain + v0 * decay; }
};

StepMap step_map(double dt_seconds, const CircuitState& state, double capacitance_farads);

double voltage_step(double v0, double dt_seconds, const CircuitState& state, double capacitance_farads);

/// Asymptote I * R_eq of the exponential step.
double steady_state_voltage(const CircuitState& state);

}  // namespace ehsched
