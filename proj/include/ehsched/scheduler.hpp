#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ehsched/energy_model.hpp"
#include "ehsched/workload.hpp"

namespace ehsched {

/// One schedulable atom of a time-indexed program. Slots are absolute grid
/// indices; the allowed start slots are [first_start, last_start], already
/// clipped so the whole execution fits before the program's end slot.
struct ProgramInstance {
  int id = 0;  // instance id from the workload
  std::string name;
  double priority = 1.0;
  double current = 0.0;
  int first_start = 0;
  int last_start = -1;
  int duration = 1;
  std::vector<int> parents;  // local indices into TimeIndexedProgram::instances
  int load_class = 0;        // row of TimeIndexedProgram::step_maps

  bool has_domain() const { return first_start <= last_start; }
  int domain_size() const { return has_domain() ? last_start - first_start + 1 : 0; }
};

/// Time-indexed 0-1 program over slots [begin_slot, end_slot).
///
/// Voltage V_t is the capacitor voltage at the end of slot t and follows
/// V_t = step(V_{t-1}) with the load of the task occupying slot t, or the
/// sleep load when no task runs. V_{begin-1} is v_init. A task may start only
/// when V_{start-1} >= v_min and every V_t it occupies stays in [v_min, v_max].
struct TimeIndexedProgram {
  double dt = 0.0;
  int begin_slot = 0;
  int end_slot = 0;
  double v_init = 0.0;
  CircuitParams circuit;
  std::vector<double> harvest_power;  // watts, one per slot
  std::vector<ProgramInstance> instances;
  std::vector<double> load_currents;  // [0] is the sleep current
  std::vector<std::vector<StepMap>> step_maps;  // [load class][slot - begin_slot]

  int slot_count() const { return end_slot - begin_slot; }
  /// Local index of an instance id, or -1.
  int local_index(int instance_id) const;
};

inline constexpr int kNotScheduled = std::numeric_limits<int>::max();

enum class Optimality { proven, time_limited };

struct Schedule {
  std::map<int, int> starts;  // instance id -> absolute start slot
  double objective = 0.0;
  std::vector<double> voltage;  // V_t for every program slot
  Optimality optimality = Optimality::proven;
  double upper_bound = 0.0;  // optimistic bound on the objective
  double gap = 0.0;          // (upper_bound - objective) / upper_bound
};

/// Full-horizon program: every gridded instance, slots [0, grid.slot_count).
TimeIndexedProgram build_program(const Grid& grid, const CircuitParams& circuit, const HarvesterProfile& harvester);

/// Restriction used by windowed re-optimization.
struct ProgramWindow {
  int begin_slot = 0;
  int end_slot = 0;
  double v_init = 0.0;
  std::vector<int> completed;  // instance ids already executed (precedence satisfied, not re-run)
  std::vector<int> excluded;   // instance ids never to include
};

/// Keeps instances whose start window intersects the window, whose execution
/// fits inside it, and whose parents are completed or also kept.
TimeIndexedProgram build_window_program(const Grid& grid, const CircuitParams& circuit,
                                        const HarvesterProfile& harvester, const ProgramWindow& window);

struct SolveOptions {
  double time_limit_seconds = 1800.0;
};

/// Exact maximization of the summed priority of started instances.
/// Among equal objectives (relative tolerance 1e-9) the start vector ordered
/// by instance id, with unscheduled = +inf, is minimized lexicographically.
/// Throws InvalidParameter for a non-positive time limit and
/// InfeasibleProgram when v_init < v_min.
Schedule solve_exact(const TimeIndexedProgram& program, const SolveOptions& options = {});

/// solve_exact without the v_init precondition: used when a carried-over
/// voltage may sit below v_min (tasks simply cannot start until it recovers).
Schedule solve_from_state(const TimeIndexedProgram& program, const SolveOptions& options = {});

/// Exhaustive enumeration oracle. Refuses (OracleTooLarge) above 6 instances
/// or more than 1e7 candidate assignments.
Schedule brute_force(const TimeIndexedProgram& program);

/// Voltage trajectory of a start map under the program's model.
std::vector<double> voltage_trajectory(const TimeIndexedProgram& program, const std::map<int, int>& starts);

struct Violation {
  std::string constraint;
  int slot = -1;
  int instance_id = -1;
  std::string message;
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  std::vector<double> recomputed_voltage;
  bool ok() const { return violations.empty(); }
  std::size_t count(const std::string& constraint) const;
};

/// Re-checks every constraint from scratch, recomputing V_t slot by slot
/// from the energy model rather than from the program's step tables.
FeasibilityReport verify_schedule(const Schedule& schedule, const TimeIndexedProgram& program);

/// True if a and b are equal within the objective tolerance.
bool objective_equal(double a, double b);

}  // namespace ehsched
