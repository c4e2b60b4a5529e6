#pragma once

#include <span>
#include <string>

#include "ehsched/scenario.hpp"
#include "ehsched/scheduler.hpp"
#include "ehsched/simulator.hpp"

namespace ehsched {

/// Outcome of one simulated run. With no instances both rates are 1.0
/// (vacuous success).
struct Metrics {
  double task_success_rate = 1.0;
  double priority_success_rate = 1.0;
  int power_failures = 0;
  double on_time_seconds = 0.0;  // slots inside the horizon not spent off
  int completed = 0;
  int total = 0;
  double objective = 0.0;  // summed priority of completed instances

  bool operator==(const Metrics&) const = default;
};

/// Late completions are not successes. Throws InvalidParameter if the trace
/// completes an unknown instance.
Metrics compute_metrics(const SimTrace& trace, std::span<const TaskInstance> instances);

/// Columns: time_s,voltage_v,mode,active_task (one row per slot).
std::string save_trace(const SimTrace& trace);

/// Keys in fixed order: task_success_rate, priority_success_rate,
/// power_failures, on_time_seconds, completed, total, objective.
std::string save_metrics(const Metrics& metrics);

/// Columns: instance_id,template,start_slot,start_time_s.
std::string save_schedule(const Schedule& schedule, const PreparedScenario& prepared);

/// Reads the instance_id and start_slot columns written by save_schedule.
Schedule load_schedule(const std::string& text);

}  // namespace ehsched
