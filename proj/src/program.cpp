#include <algorithm>
#include <cmath>
#include <set>

#include "ehsched/errors.hpp"
#include "ehsched/scheduler.hpp"

namespace ehsched {

namespace {

double slot_power(const HarvesterProfile& harvester, int slot, double dt) {
  // Nudge into the slot so a segment starting exactly on a boundary applies to it.
  return harvester.power_at((static_cast<double>(slot) + 1e-9) * dt);
}

struct Candidate {
  const GriddedInstance* gridded;
  int first_start;
  int last_start;
};

TimeIndexedProgram assemble(const Grid& grid, const CircuitParams& circuit, const HarvesterProfile& harvester,
                            int begin, int end, double v_init, const std::vector<Candidate>& candidates) {
  TimeIndexedProgram program;
  program.dt = grid.dt;
  program.begin_slot = begin;
  program.end_slot = end;
  program.v_init = v_init;
  program.circuit = circuit;
  program.load_currents.push_back(circuit.sleep_current_amps);

  std::map<int, int> local;
  for (const auto& c : candidates) {
    const TaskInstance& inst = c.gridded->instance;
    ProgramInstance pi;
    pi.id = inst.id;
    pi.name = inst.template_name;
    pi.priority = inst.priority;
    pi.current = inst.current;
    pi.first_start = c.first_start;
    pi.last_start = c.last_start;
    pi.duration = c.gridded->duration_slots;
    for (int parent : inst.parents) {
      if (auto it = local.find(parent); it != local.end()) pi.parents.push_back(it->second);
    }
    auto cls = std::find(program.load_currents.begin() + 1, program.load_currents.end(), inst.current);
    pi.load_class = static_cast<int>(cls - program.load_currents.begin());
    if (cls == program.load_currents.end()) program.load_currents.push_back(inst.current);
    local.emplace(inst.id, static_cast<int>(program.instances.size()));
    program.instances.push_back(std::move(pi));
  }

  const int slots = end - begin;
  program.harvest_power.resize(static_cast<std::size_t>(slots));
  program.step_maps.assign(program.load_currents.size(), std::vector<StepMap>(static_cast<std::size_t>(slots)));
  for (int s = 0; s < slots; ++s) {
    const double power = slot_power(harvester, begin + s, grid.dt);
    program.harvest_power[static_cast<std::size_t>(s)] = power;
    const HarvesterSource source = harvester_for_power(circuit.v_max, power);
    for (std::size_t k = 0; k < program.load_currents.size(); ++k) {
      const CircuitState state = load_equivalent(circuit.operating_voltage, program.load_currents[k], source);
      program.step_maps[k][static_cast<std::size_t>(s)] = step_map(grid.dt, state, circuit.capacitance_farads);
    }
  }
  return program;
}

}  // namespace

int TimeIndexedProgram::local_index(int instance_id) const {
  for (std::size_t i = 0; i < instances.size(); ++i)
    if (instances[i].id == instance_id) return static_cast<int>(i);
  return -1;
}

bool objective_equal(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

TimeIndexedProgram build_program(const Grid& grid, const CircuitParams& circuit, const HarvesterProfile& harvester) {
  circuit.validate();
  std::vector<Candidate> candidates;
  for (const auto& g : grid.instances) {
    const int last = std::min(g.latest_start_slot, grid.slot_count - g.duration_slots);
    // An empty domain is closed from the first slot on.
    candidates.push_back({&g, g.arrival_slot, last >= g.arrival_slot ? last : -1});
  }
  return assemble(grid, circuit, harvester, 0, grid.slot_count, circuit.v_init, candidates);
}

TimeIndexedProgram build_window_program(const Grid& grid, const CircuitParams& circuit,
                                        const HarvesterProfile& harvester, const ProgramWindow& window) {
  if (window.begin_slot < 0 || window.end_slot <= window.begin_slot || window.end_slot > grid.slot_count)
    throw InvalidParameter("window slots out of range");
  const std::set<int> completed(window.completed.begin(), window.completed.end());
  const std::set<int> excluded(window.excluded.begin(), window.excluded.end());
  std::set<int> kept;
  std::vector<Candidate> candidates;
  // Instances are in topological id order, so parents are decided first.
  for (const auto& g : grid.instances) {
    const int id = g.instance.id;
    if (completed.contains(id) || excluded.contains(id) || !g.schedulable) continue;
    const int first = std::max(g.arrival_slot, window.begin_slot);
    const int last = std::min(g.latest_start_slot, window.end_slot - g.duration_slots);
    if (first > last) continue;
    const bool parents_ok = std::all_of(g.instance.parents.begin(), g.instance.parents.end(),
                                        [&](int p) { return completed.contains(p) || kept.contains(p); });
    if (!parents_ok) continue;
    kept.insert(id);
    candidates.push_back({&g, first, last});
  }
  return assemble(grid, circuit, harvester, window.begin_slot, window.end_slot, window.v_init, candidates);
}

std::vector<double> voltage_trajectory(const TimeIndexedProgram& program, const std::map<int, int>& starts) {
  const int slots = program.slot_count();
  std::vector<int> occupant(static_cast<std::size_t>(slots), 0);
  for (const auto& [id, start] : starts) {
    const int j = program.local_index(id);
    if (j < 0) throw InvalidParameter("schedule references unknown instance " + std::to_string(id));
    const auto& inst = program.instances[static_cast<std::size_t>(j)];
    for (int s = start; s < start + inst.duration; ++s) {
      const int rel = s - program.begin_slot;
      if (rel >= 0 && rel < slots) occupant[static_cast<std::size_t>(rel)] = inst.load_class;
    }
  }
  std::vector<double> voltage(static_cast<std::size_t>(slots));
  double v = program.v_init;
  for (int s = 0; s < slots; ++s) {
    const auto k = static_cast<std::size_t>(occupant[static_cast<std::size_t>(s)]);
    v = program.step_maps[k][static_cast<std::size_t>(s)].apply(v);
    voltage[static_cast<std::size_t>(s)] = v;
  }
  return voltage;
}

}  // namespace ehsched
