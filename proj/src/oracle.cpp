// Exhaustive oracle for tiny programs. Deliberately shares nothing with the
// search in solver.cpp beyond the energy model: every candidate assignment
// is checked constraint by constraint and its voltage simulated slot by slot.

#include <algorithm>
#include <optional>

#include "ehsched/errors.hpp"
#include "ehsched/scheduler.hpp"

namespace ehsched {

namespace {

constexpr std::size_t kMaxInstances = 6;
constexpr double kMaxAssignments = 1e7;

struct Evaluator {
  const TimeIndexedProgram& program;
  std::vector<CircuitState> sleep_states;              // per slot
  std::vector<std::vector<CircuitState>> task_states;  // [instance][slot]

  explicit Evaluator(const TimeIndexedProgram& p) : program(p) {
    const auto& c = p.circuit;
    for (int s = 0; s < p.slot_count(); ++s) {
      const HarvesterSource source = harvester_for_power(c.v_max, p.harvest_power[static_cast<std::size_t>(s)]);
      sleep_states.push_back(load_equivalent(c.operating_voltage, c.sleep_current_amps, source));
    }
    for (const auto& inst : p.instances) {
      std::vector<CircuitState> row;
      for (int s = 0; s < p.slot_count(); ++s) {
        const HarvesterSource source =
            harvester_for_power(c.v_max, p.harvest_power[static_cast<std::size_t>(s)]);
        row.push_back(load_equivalent(c.operating_voltage, inst.current, source));
      }
      task_states.push_back(std::move(row));
    }
  }

  // Objective of a feasible assignment, or nullopt.
  std::optional<double> evaluate(const std::vector<int>& starts) const {
    const auto n = program.instances.size();
    std::vector<int> occupant(static_cast<std::size_t>(program.slot_count()), -1);
    for (std::size_t j = 0; j < n; ++j) {
      if (starts[j] == kNotScheduled) continue;
      const auto& inst = program.instances[j];
      if (starts[j] < inst.first_start || starts[j] > inst.last_start) return std::nullopt;
      if (starts[j] + inst.duration > program.end_slot) return std::nullopt;
      for (int p : inst.parents) {
        const auto pi = static_cast<std::size_t>(p);
        if (starts[pi] == kNotScheduled) return std::nullopt;
        if (starts[j] < starts[pi] + program.instances[pi].duration) return std::nullopt;
      }
      for (int s = starts[j]; s < starts[j] + inst.duration; ++s) {
        auto& cell = occupant[static_cast<std::size_t>(s - program.begin_slot)];
        if (cell != -1) return std::nullopt;
        cell = static_cast<int>(j);
      }
    }
    const auto& c = program.circuit;
    double v = program.v_init;
    for (int s = 0; s < program.slot_count(); ++s) {
      const int j = occupant[static_cast<std::size_t>(s)];
      const bool starting = j >= 0 && starts[static_cast<std::size_t>(j)] == program.begin_slot + s;
      if (starting && v < c.v_min) return std::nullopt;
      const CircuitState& state = j >= 0 ? task_states[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)]
                                         : sleep_states[static_cast<std::size_t>(s)];
      v = voltage_step(v, program.dt, state, c.capacitance_farads);
      if (j >= 0 && (v < c.v_min || v > c.v_max)) return std::nullopt;
    }
    double objective = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (starts[j] != kNotScheduled) objective += program.instances[j].priority;
    return objective;
  }
};

}  // namespace

Schedule brute_force(const TimeIndexedProgram& program) {
  const auto n = program.instances.size();
  if (n > kMaxInstances) throw OracleTooLarge("brute force limited to 6 instances");
  double assignments = 1.0;
  for (const auto& inst : program.instances) assignments *= static_cast<double>(inst.domain_size() + 1);
  if (assignments > kMaxAssignments) throw OracleTooLarge("brute force limited to 1e7 assignments");

  const Evaluator evaluator(program);
  std::vector<int> current(n, kNotScheduled);
  std::vector<int> best;
  double best_objective = 0.0;

  // Odometer over {start slots..., unscheduled} per instance.
  std::vector<int> choice(n, 0);
  auto value = [&](std::size_t j, int c) {
    const auto& inst = program.instances[j];
    return c < inst.domain_size() ? inst.first_start + c : kNotScheduled;
  };
  while (true) {
    for (std::size_t j = 0; j < n; ++j) current[j] = value(j, choice[j]);
    if (auto objective = evaluator.evaluate(current)) {
      const bool better = best.empty() || (!objective_equal(*objective, best_objective) && *objective > best_objective) ||
                          (objective_equal(*objective, best_objective) && current < best);
      if (better) {
        best = current;
        best_objective = *objective;
      }
    }
    std::size_t j = 0;
    for (; j < n; ++j) {
      if (++choice[j] <= program.instances[j].domain_size()) break;
      choice[j] = 0;
    }
    if (j == n) break;
  }

  Schedule schedule;
  for (std::size_t j = 0; j < n; ++j)
    if (best[j] != kNotScheduled) schedule.starts.emplace(program.instances[j].id, best[j]);
  schedule.objective = best_objective;
  schedule.upper_bound = best_objective;
  schedule.voltage = voltage_trajectory(program, schedule.starts);
  return schedule;
}

}  // namespace ehsched
