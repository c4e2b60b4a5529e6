#include "ehsched/energy_model.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <string>

#include "ehsched/errors.hpp"

namespace ehsched {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

}  // namespace

void CircuitParams::validate() const {
  require(std::isfinite(capacitance_farads) && capacitance_farads > 0.0, "capacitance must be positive");
  require(std::isfinite(v_min) && v_min > 0.0, "v_min must be positive");
  require(std::isfinite(v_max) && v_max > v_min, "v_max must exceed v_min");
  require(std::isfinite(v_init) && v_init >= 0.0 && v_init <= v_max, "v_init must lie in [0, v_max]");
  require(std::isfinite(operating_voltage) && operating_voltage > 0.0, "operating voltage must be positive");
  require(std::isfinite(sleep_current_amps) && sleep_current_amps > 0.0, "sleep current must be positive");
  require(std::isfinite(turn_on_current_amps) && turn_on_current_amps > 0.0, "turn-on current must be positive");
  require(std::isfinite(turn_on_time_seconds) && turn_on_time_seconds > 0.0, "turn-on time must be positive");
}

HarvesterProfile HarvesterProfile::constant(double power_watts, double horizon) {
  return {{{0.0, power_watts}}, horizon};
}

double HarvesterProfile::power_at(double time) const {
  auto it = std::upper_bound(segments.begin(), segments.end(), time,
                             [](double t, const HarvestSegment& s) { return t < s.start_time; });
  if (it == segments.begin()) return segments.empty() ? 0.0 : segments.front().power_watts;
  return std::prev(it)->power_watts;
}

void HarvesterProfile::validate() const {
  require(std::isfinite(horizon) && horizon > 0.0, "harvester horizon must be positive");
  require(!segments.empty(), "harvester needs at least one segment");
  require(segments.front().start_time == 0.0, "first harvester segment must start at 0");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    require(std::isfinite(segments[i].power_watts) && segments[i].power_watts >= 0.0,
            "harvester power must be non-negative");
    if (i > 0) require(segments[i].start_time > segments[i - 1].start_time,
                       "harvester segment start times must increase");
  }
}

HarvesterSource HarvesterSource::none() {
  return {std::numeric_limits<double>::infinity(), 0.0};
}

HarvesterSource harvester_params(double v_max, double power_watts) {
  require(std::isfinite(v_max) && v_max > 0.0, "v_max must be positive");
  require(std::isfinite(power_watts) && power_watts > 0.0, "harvester power must be positive");
  const double r_h = v_max * v_max / power_watts;
  return {r_h, v_max / r_h};
}

HarvesterSource harvester_for_power(double v_max, double power_watts) {
  require(power_watts >= 0.0, "harvester power must be non-negative");
  if (power_watts == 0.0) return HarvesterSource::none();
  return harvester_params(v_max, power_watts);
}

CircuitState load_equivalent(double e_volts, double load_current_amps, const HarvesterSource& source) {
  require(std::isfinite(e_volts) && e_volts > 0.0, "operating voltage must be positive");
  require(std::isfinite(load_current_amps) && load_current_amps > 0.0, "load current must be positive");
  const double r_load = e_volts / load_current_amps;
  const double r_h = source.resistance_ohms;
  const double r_eq = std::isinf(r_h) ? r_load : r_load * r_h / (r_load + r_h);
  return {source.current_amps, r_h, r_load, r_eq};
}

CircuitState open_load(const HarvesterSource& source) {
  return {source.current_amps, source.resistance_ohms, std::numeric_limits<double>::infinity(),
          source.resistance_ohms};
}

StepMap step_map(double dt_seconds, const CircuitState& state, double capacitance_farads) {
  require(dt_seconds >= 0.0, "time step must be non-negative");
  require(capacitance_farads > 0.0, "capacitance must be positive");
  const double r_eq = state.equivalent_resistance_ohms;
  if (std::isinf(r_eq)) {
    // No harvester and no load: pure current-source charging (I is 0 here in practice).
    return {state.source_current_amps * dt_seconds / capacitance_farads, 1.0};
  }
  const double decay = std::exp(-dt_seconds / (r_eq * capacitance_farads));
  return {state.source_current_amps * r_eq * (1.0 - decay), decay};
}

double voltage_step(double v0, double dt_seconds, const CircuitState& state, double capacitance_farads) {
  return step_map(dt_seconds, state, capacitance_farads).apply(v0);
}

double steady_state_voltage(const CircuitState& state) {
  if (state.source_current_amps == 0.0) return 0.0;
  return state.source_current_amps * state.equivalent_resistance_ohms;
}

}  // namespace ehsched
