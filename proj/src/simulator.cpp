#include "ehsched/simulator.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <tuple>

#include "ehsched/errors.hpp"

namespace ehsched {

namespace {

// Picks the instance (grid index) to start in an idle slot, or -1.
using Chooser = std::function<int(int slot, const std::vector<char>& completed)>;

SimTrace run_device(const PreparedScenario& prepared, double v_turn_on, bool idle_brownout, const Chooser& choose) {
  const Scenario& sc = prepared.scenario;
  const CircuitParams& c = sc.circuit;
  const Grid& grid = prepared.grid;
  const double dt = grid.dt;
  const int turn_on_slots = std::max(1, slots_ceil(c.turn_on_time_seconds, dt));

  SimTrace trace;
  trace.dt = dt;
  trace.horizon_slots = slots_ceil(sc.horizon, dt);
  trace.slots.reserve(static_cast<std::size_t>(grid.slot_count));

  std::vector<char> completed(grid.instances.size(), 0);
  DeviceMode mode = c.v_init >= c.v_min ? DeviceMode::sleeping : DeviceMode::off;
  double v = c.v_init;
  int active = -1;
  int remaining = 0;

  for (int t = 0; t < grid.slot_count; ++t) {
    const double power = sc.harvester.power_at((static_cast<double>(t) + 1e-9) * dt);
    const HarvesterSource source = harvester_for_power(c.v_max, power);

    if (mode == DeviceMode::sleeping) {
      const int j = choose(t, completed);
      if (j >= 0) {
        mode = DeviceMode::active;
        active = j;
        remaining = grid.instances[static_cast<std::size_t>(j)].duration_slots;
      }
    }

    SlotRecord record;
    record.time = static_cast<double>(t + 1) * dt;
    record.mode = mode;
    switch (mode) {
      case DeviceMode::active: {
        const auto& inst = grid.instances[static_cast<std::size_t>(active)].instance;
        v = voltage_step(v, dt, load_equivalent(c.operating_voltage, inst.current, source), c.capacitance_farads);
        record.active_instance = inst.id;
        --remaining;
        if (v < c.v_min) {
          trace.power_failures.push_back(t);
          mode = DeviceMode::off;
          active = -1;
        } else if (remaining == 0) {
          const auto& g = grid.instances[static_cast<std::size_t>(active)];
          trace.completions.push_back({inst.id, t, t - g.duration_slots + 1 > g.latest_start_slot});
          completed[static_cast<std::size_t>(active)] = 1;
          mode = DeviceMode::sleeping;
          active = -1;
        }
        break;
      }
      case DeviceMode::sleeping:
        v = voltage_step(v, dt, load_equivalent(c.operating_voltage, c.sleep_current_amps, source),
                         c.capacitance_farads);
        if (idle_brownout && v < c.v_min) mode = DeviceMode::off;
        break;
      case DeviceMode::turning_on:
        v = voltage_step(v, dt, load_equivalent(c.operating_voltage, c.turn_on_current_amps, source),
                         c.capacitance_farads);
        if (v < c.v_min) {
          mode = DeviceMode::off;
        } else if (--remaining == 0) {
          mode = DeviceMode::sleeping;
        }
        break;
      case DeviceMode::off:
        v = voltage_step(v, dt, open_load(source), c.capacitance_farads);
        if (v >= v_turn_on) {
          mode = DeviceMode::turning_on;
          remaining = turn_on_slots;
          trace.turn_ons.push_back(t + 1);
        }
        break;
    }
    record.voltage = v;
    trace.slots.push_back(record);
  }
  return trace;
}

bool parents_done(const GriddedInstance& g, const std::vector<char>& completed) {
  return std::all_of(g.instance.parents.begin(), g.instance.parents.end(),
                     [&](int p) { return completed[static_cast<std::size_t>(p)] != 0; });
}

}  // namespace

std::string_view to_string(DeviceMode mode) {
  switch (mode) {
    case DeviceMode::active: return "active";
    case DeviceMode::sleeping: return "sleeping";
    case DeviceMode::off: return "off";
    case DeviceMode::turning_on: return "turning_on";
  }
  return "unknown";
}

void PolicyInk::validate(const CircuitParams& circuit) const {
  if (!(v_turn_on > circuit.v_min && v_turn_on <= circuit.v_max))
    throw InvalidParameter("turn-on threshold must lie in (v_min, v_max]");
}

SimTrace simulate_schedule(const Schedule& schedule, const PreparedScenario& prepared) {
  const Grid& grid = prepared.grid;
  std::multimap<int, int> by_slot;  // start slot -> grid index
  for (const auto& [id, start] : schedule.starts) {
    if (id < 0 || static_cast<std::size_t>(id) >= grid.instances.size() ||
        grid.instances[static_cast<std::size_t>(id)].instance.id != id)
      throw InvalidParameter("schedule references unknown instance " + std::to_string(id));
    by_slot.emplace(start, id);
  }
  return run_device(prepared, prepared.scenario.v_turn_on, false, [&](int t, const std::vector<char>& completed) {
    auto [lo, hi] = by_slot.equal_range(t);
    for (auto it = lo; it != hi; ++it) {
      const auto& g = grid.instances[static_cast<std::size_t>(it->second)];
      if (!completed[static_cast<std::size_t>(it->second)] && parents_done(g, completed)) return it->second;
    }
    return -1;
  });
}

SimTrace simulate_policy(const PolicyInk& policy, const PreparedScenario& prepared) {
  policy.validate(prepared.scenario.circuit);
  const Grid& grid = prepared.grid;
  return run_device(prepared, policy.v_turn_on, true, [&](int t, const std::vector<char>& completed) {
    int best = -1;
    for (std::size_t j = 0; j < grid.instances.size(); ++j) {
      const auto& g = grid.instances[j];
      if (completed[j] || t < g.arrival_slot || (!policy.run_expired && t > g.latest_start_slot)) continue;
      if (t + g.duration_slots > grid.slot_count || !parents_done(g, completed)) continue;
      if (best < 0) {
        best = static_cast<int>(j);
        continue;
      }
      const auto& b = grid.instances[static_cast<std::size_t>(best)].instance;
      const auto& cand = g.instance;
      if (std::make_tuple(-cand.priority, cand.start_deadline, cand.id) < std::make_tuple(-b.priority, b.start_deadline, b.id))
        best = static_cast<int>(j);
    }
    return best;
  });
}

}  // namespace ehsched
