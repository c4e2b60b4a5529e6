#include "ehsched/lookahead.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "ehsched/errors.hpp"
#include "ehsched/simulator.hpp"

namespace ehsched {

WindowPlan solve_windowed(const PreparedScenario& prepared, double window_seconds, const SolveOptions& options) {
  const Scenario& sc = prepared.scenario;
  const Grid& grid = prepared.grid;
  if (!(window_seconds >= grid.dt * (1.0 - 1e-9)))
    throw InvalidParameter("window must be at least one slot long");

  const int count = std::max(1, slots_ceil(sc.horizon / window_seconds, 1.0));
  WindowPlan plan;
  plan.window_seconds = window_seconds;
  std::vector<int> completed;
  double v = sc.circuit.v_init;
  bool proven = true;

  for (int k = 0; k < count; ++k) {
    const int begin = static_cast<int>(std::lround(k * window_seconds / grid.dt));
    const int end = k + 1 == count ? grid.slot_count
                                   : static_cast<int>(std::lround((k + 1) * window_seconds / grid.dt));
    if (end <= begin) continue;
    const TimeIndexedProgram program =
        build_window_program(grid, sc.circuit, sc.harvester, ProgramWindow{begin, end, v, completed, {}});
    WindowResult result;
    result.begin_slot = begin;
    result.end_slot = end;
    result.v_start = v;
    result.candidates = static_cast<int>(program.instances.size());
    result.schedule = solve_from_state(program, options);
    proven = proven && result.schedule.optimality == Optimality::proven;
    for (const auto& [id, start] : result.schedule.starts) {
      completed.push_back(id);
      plan.stitched.starts.emplace(id, start);
    }
    v = result.schedule.voltage.back();
    plan.windows.push_back(std::move(result));
  }

  const TimeIndexedProgram full = build_program(grid, sc.circuit, sc.harvester);
  for (const auto& [id, start] : plan.stitched.starts)
    plan.stitched.objective += full.instances[static_cast<std::size_t>(full.local_index(id))].priority;
  plan.stitched.voltage = voltage_trajectory(full, plan.stitched.starts);
  plan.stitched.optimality = proven ? Optimality::proven : Optimality::time_limited;
  plan.stitched.upper_bound = plan.stitched.objective;
  return plan;
}

std::vector<SweepRow> sweep_windows(const PreparedScenario& prepared, std::span<const double> window_sizes,
                                    const SolveOptions& options) {
  if (window_sizes.empty()) throw InvalidParameter("window size list is empty");
  std::vector<std::future<SweepRow>> jobs;
  for (double w : window_sizes) {
    jobs.push_back(std::async(std::launch::async, [&prepared, &options, w] {
      const WindowPlan plan = solve_windowed(prepared, w, options);
      SweepRow row;
      row.window_seconds = w;
      row.windows = static_cast<int>(plan.windows.size());
      double offered = 0.0;
      for (const auto& win : plan.windows) offered += win.candidates;
      row.mean_instances_per_window = plan.windows.empty() ? 0.0 : offered / static_cast<double>(plan.windows.size());
      row.metrics = compute_metrics(simulate_schedule(plan.stitched, prepared), prepared.instances);
      row.proven = plan.stitched.optimality == Optimality::proven;
      return row;
    }));
  }
  jobs.push_back(std::async(std::launch::async, [&prepared, &options] {
    const Scenario& sc = prepared.scenario;
    const TimeIndexedProgram program = build_program(prepared.grid, sc.circuit, sc.harvester);
    const Schedule schedule = solve_exact(program, options);
    SweepRow row;
    row.window_seconds = sc.horizon;
    row.full_horizon = true;
    row.windows = 1;
    row.mean_instances_per_window = static_cast<double>(program.instances.size());
    row.metrics = compute_metrics(simulate_schedule(schedule, prepared), prepared.instances);
    row.proven = schedule.optimality == Optimality::proven;
    return row;
  }));
  std::vector<SweepRow> rows;
  for (auto& job : jobs) rows.push_back(job.get());
  return rows;
}

std::string save_sweep(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "window_s,full_horizon,windows,mean_instances_per_window,task_success_rate,priority_success_rate,"
         "completed,total,objective,power_failures,proven\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%d,%d,%.3f,%.6f,%.6f,%d,%d,%.6g,%d,%d\n", r.window_seconds,
                  r.full_horizon ? 1 : 0, r.windows, r.mean_instances_per_window, r.metrics.task_success_rate,
                  r.metrics.priority_success_rate, r.metrics.completed, r.metrics.total, r.metrics.objective,
                  r.metrics.power_failures, r.proven ? 1 : 0);
    out << buf;
  }
  return out.str();
}

}  // namespace ehsched
