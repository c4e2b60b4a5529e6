#pragma once

#include <span>
#include <string>
#include <vector>

#include "ehsched/metrics.hpp"
#include "ehsched/scenario.hpp"
#include "ehsched/scheduler.hpp"

namespace ehsched {

struct WindowResult {
  int begin_slot = 0;
  int end_slot = 0;
  double v_start = 0.0;  // voltage carried into the window
  int candidates = 0;    // instances offered to the window's program
  Schedule schedule;
};

/// Re-optimization over consecutive look-ahead windows. The windows tile
/// [0, horizon); the last one also covers the grid tail past the horizon so
/// that a single window reproduces the full-horizon program exactly.
struct WindowPlan {
  double window_seconds = 0.0;
  std::vector<WindowResult> windows;
  Schedule stitched;  // voltage and objective over the full-horizon program
};

/// Each window sees the instances not yet executed whose start window meets
/// it and whose execution fits inside it, starting from the voltage left by
/// the previous window. Throws InvalidParameter if window_seconds < dt.
WindowPlan solve_windowed(const PreparedScenario& prepared, double window_seconds, const SolveOptions& options = {});

struct SweepRow {
  double window_seconds = 0.0;
  bool full_horizon = false;
  int windows = 1;
  double mean_instances_per_window = 0.0;
  Metrics metrics;
  bool proven = true;
};

/// One row per window size, followed by the full-horizon reference row.
/// Rows are solved concurrently; the result does not depend on that.
std::vector<SweepRow> sweep_windows(const PreparedScenario& prepared, std::span<const double> window_sizes,
                                    const SolveOptions& options = {});

/// CSV with columns window_s,full_horizon,windows,mean_instances_per_window,
/// task_success_rate,priority_success_rate,completed,total,objective,power_failures,proven.
std::string save_sweep(std::span<const SweepRow> rows);

}  // namespace ehsched
