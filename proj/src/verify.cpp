#include <algorithm>
#include <cmath>
#include <sstream>

#include "ehsched/scheduler.hpp"

namespace ehsched {

std::size_t FeasibilityReport::count(const std::string& constraint) const {
  return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                [&](const Violation& v) { return v.constraint == constraint; }));
}

FeasibilityReport verify_schedule(const Schedule& schedule, const TimeIndexedProgram& program) {
  FeasibilityReport report;
  auto flag = [&](std::string constraint, int slot, int id, std::string message) {
    report.violations.push_back({std::move(constraint), slot, id, std::move(message)});
  };

  const int slots = program.slot_count();
  std::vector<std::vector<int>> occupants(static_cast<std::size_t>(std::max(slots, 0)));
  double objective = 0.0;

  for (const auto& [id, start] : schedule.starts) {
    const int j = program.local_index(id);
    if (j < 0) {
      flag("unknown instance", start, id, "instance is not part of the program");
      continue;
    }
    const auto& inst = program.instances[static_cast<std::size_t>(j)];
    objective += inst.priority;
    if (start < inst.first_start || start > inst.last_start) {
      std::ostringstream msg;
      msg << "start " << start << " outside [" << inst.first_start << ", " << inst.last_start << "]";
      flag("start window", start, id, msg.str());
    }
    if (start < program.begin_slot || start + inst.duration > program.end_slot) {
      flag("horizon", start, id, "execution does not fit inside the program slots");
    }
    for (int s = start; s < start + inst.duration; ++s) {
      const int rel = s - program.begin_slot;
      if (rel >= 0 && rel < slots) occupants[static_cast<std::size_t>(rel)].push_back(j);
    }
    for (int p : inst.parents) {
      const auto& parent = program.instances[static_cast<std::size_t>(p)];
      auto it = schedule.starts.find(parent.id);
      if (it == schedule.starts.end()) {
        flag("precedence", start, id, "parent " + std::to_string(parent.id) + " is not scheduled");
      } else if (start < it->second + parent.duration) {
        flag("precedence", start, id, "starts before parent " + std::to_string(parent.id) + " finishes");
      }
    }
  }

  for (int s = 0; s < slots; ++s) {
    const auto& occ = occupants[static_cast<std::size_t>(s)];
    if (occ.size() > 1) {
      std::ostringstream msg;
      msg << occ.size() << " instances share the slot";
      flag("exclusivity", program.begin_slot + s, program.instances[static_cast<std::size_t>(occ[1])].id, msg.str());
    }
  }

  // Independent voltage recursion straight from the energy model.
  const auto& c = program.circuit;
  double v = program.v_init;
  report.recomputed_voltage.reserve(static_cast<std::size_t>(std::max(slots, 0)));
  for (int s = 0; s < slots; ++s) {
    const auto& occ = occupants[static_cast<std::size_t>(s)];
    const HarvesterSource source = harvester_for_power(c.v_max, program.harvest_power[static_cast<std::size_t>(s)]);
    double current = c.sleep_current_amps;
    int active = -1;
    for (int j : occ) {
      const auto& inst = program.instances[static_cast<std::size_t>(j)];
      if (active < 0 || inst.current > current) {
        current = inst.current;
        active = j;
      }
    }
    const int slot = program.begin_slot + s;
    const int active_id = active >= 0 ? program.instances[static_cast<std::size_t>(active)].id : -1;
    if (active >= 0 && schedule.starts.at(active_id) == slot && v < c.v_min) {
      std::ostringstream msg;
      msg << "starts at " << v << " V, below v_min " << c.v_min;
      flag("voltage lower bound", slot, active_id, msg.str());
    }
    v = voltage_step(v, program.dt, load_equivalent(c.operating_voltage, current, source), c.capacitance_farads);
    report.recomputed_voltage.push_back(v);
    if (active >= 0 && v < c.v_min) {
      std::ostringstream msg;
      msg << "V = " << v << " below v_min " << c.v_min;
      flag("voltage lower bound", slot, active_id, msg.str());
    }
    if (v > c.v_max) {
      std::ostringstream msg;
      msg << "V = " << v << " above v_max " << c.v_max;
      flag("voltage upper bound", slot, active_id, msg.str());
    }
  }

  if (!schedule.voltage.empty()) {
    if (schedule.voltage.size() != report.recomputed_voltage.size()) {
      flag("voltage recursion", -1, -1, "voltage trajectory length differs from the program");
    } else {
      for (std::size_t s = 0; s < schedule.voltage.size(); ++s) {
        const double expect = report.recomputed_voltage[s];
        if (std::abs(schedule.voltage[s] - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
          flag("voltage recursion", program.begin_slot + static_cast<int>(s), -1, "reported V_t disagrees with recursion");
          break;
        }
      }
    }
  }

  if (!objective_equal(objective, schedule.objective)) {
    std::ostringstream msg;
    msg << "reported " << schedule.objective << ", scheduled priorities sum to " << objective;
    flag("objective", -1, -1, msg.str());
  }
  return report;
}

}  // namespace ehsched
