#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ehsched {

/// Fires at first_arrival, first_arrival + period, ... while below the horizon.
struct Periodic {
  double first_arrival = 0.0;
  double period = 1.0;
  bool operator==(const Periodic&) const = default;
};

/// One child instance per parent instance.
struct AfterParent {
  std::string parent;
  bool operator==(const AfterParent&) const = default;
};

/// One child instance per `count` consecutive parent instances.
struct AfterCount {
  std::string parent;
  int count = 1;
  bool operator==(const AfterCount&) const = default;
};

using Trigger = std::variant<Periodic, AfterParent, AfterCount>;

struct TaskTemplate {
  std::string name;
  double priority = 1.0;
  double exec_time = 0.0;     // seconds
  double current = 0.0;       // amps drawn while executing
  double rel_deadline = 0.0;  // latest start, measured from readiness
  Trigger trigger = Periodic{};

  bool operator==(const TaskTemplate&) const = default;
};

struct TaskInstance {
  int id = 0;
  std::string template_name;
  double priority = 1.0;
  double exec_time = 0.0;
  double current = 0.0;
  double arrival = 0.0;         // earliest start, seconds
  double start_deadline = 0.0;  // latest start, seconds
  std::vector<int> parents;     // instance ids, all smaller than id
};

struct GriddedInstance {
  TaskInstance instance;
  int arrival_slot = 0;
  int latest_start_slot = 0;
  int duration_slots = 1;
  bool schedulable = true;  // some start in the window fits inside the grid
};

struct Grid {
  double dt = 0.0;
  int slot_count = 0;  // horizon / dt plus the longest duration
  std::vector<GriddedInstance> instances;
  std::vector<std::string> warnings;
};

/// Flattens templates into dated instances. Ids are topological: sorted by
/// arrival, then template declaration order. A chained instance becomes ready
/// once every parent could have finished (max over parents of parent arrival
/// plus parent execution time).
std::vector<TaskInstance> expand(std::span<const TaskTemplate> templates, double horizon);

Grid to_grid(std::span<const TaskInstance> instances, double dt, double horizon);

struct Finding {
  int instance_id;
  std::string what;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
};

ValidationReport validate(std::span<const TaskInstance> instances);

/// ceil/floor of x/dt that tolerate representation error in x and dt.
int slots_ceil(double seconds, double dt);
int slots_floor(double seconds, double dt);

}  // namespace ehsched
