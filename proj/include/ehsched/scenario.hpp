#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsched/energy_model.hpp"
#include "ehsched/workload.hpp"

namespace ehsched {

/// Everything needed to reproduce one experiment.
struct Scenario {
  std::string name;
  CircuitParams circuit;
  HarvesterProfile harvester;
  std::vector<TaskTemplate> templates;
  double horizon = 15.0;
  double dt = 0.01;
  double v_turn_on = 2.2;  // reboot threshold after a power failure

  /// Cross-field checks; throws ScenarioError.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

/// Load failure with a location: a JSON line/column or a dotted field path.
class ScenarioError : public std::runtime_error {
public:
  ScenarioError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

private:
  std::string where_;
};

Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::filesystem::path& path);
std::string save_scenario(const Scenario& scenario);

/// Copy with a constant harvester at the given power.
Scenario with_constant_harvest(Scenario scenario, double power_watts);

/// Scenario expanded and placed on its grid.
struct PreparedScenario {
  Scenario scenario;
  std::vector<TaskInstance> instances;
  Grid grid;
};

PreparedScenario prepare(const Scenario& scenario);

}  // namespace ehsched
