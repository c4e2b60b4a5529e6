#pragma once

#include <string_view>
#include <vector>

#include "ehsched/scenario.hpp"
#include "ehsched/scheduler.hpp"

namespace ehsched {

enum class DeviceMode { active, sleeping, off, turning_on };

std::string_view to_string(DeviceMode mode);

/// State of the device during one slot; voltage is the value at the slot's end.
struct SlotRecord {
  double time = 0.0;  // end of the slot, seconds
  double voltage = 0.0;
  DeviceMode mode = DeviceMode::sleeping;
  int active_instance = -1;
};

struct Completion {
  int instance_id;
  int slot;  // last slot of the execution
  bool late = false;  // started after its start deadline
  bool operator==(const Completion&) const = default;
};

struct SimTrace {
  double dt = 0.0;
  int horizon_slots = 0;  // slots inside [0, horizon)
  std::vector<SlotRecord> slots;
  std::vector<Completion> completions;
  std::vector<int> power_failures;  // slot at whose end V fell below v_min while active
  std::vector<int> turn_ons;        // first slot of each turn-on sequence

  double failure_time(std::size_t k) const { return static_cast<double>(power_failures[k] + 1) * dt; }
};

/// Energy-unaware priority/deadline scheduler in the style of InK: runs the
/// best ready instance (priority desc, start deadline asc, id asc) with no
/// energy check, loses progress on a power failure and reboots once the
/// capacitor reaches v_turn_on.
///
/// By default an instance is dropped once its start window closes. With
/// run_expired it stays in the ready queue until it completes; such late
/// completions are recorded but do not count as successes.
struct PolicyInk {
  double v_turn_on = 2.2;
  bool run_expired = false;
  void validate(const CircuitParams& circuit) const;
};

/// Replays fixed start slots. Idle slots draw the sleep current whatever the
/// voltage, matching the planner's model; only a running task can brown out.
/// Throws InvalidParameter for a start referencing an unknown instance.
SimTrace simulate_schedule(const Schedule& schedule, const PreparedScenario& prepared);

SimTrace simulate_policy(const PolicyInk& policy, const PreparedScenario& prepared);

}  // namespace ehsched
