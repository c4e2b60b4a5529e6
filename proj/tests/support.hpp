#pragma once

// Helpers shared by the test binaries. The RC formulas here are written out
// from scratch on purpose and do not call into the library.

#include <cmath>
#include <random>
#include <string>

#include "ehsched/scenario.hpp"
#include "ehsched/scheduler.hpp"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(EHSCHED_DATA_DIR) + "/" + name; }

inline ehsched::Scenario smart_building() { return ehsched::load_scenario_file(data_path("smart_building.json")); }

struct Rc {
  double i;     // source current
  double r_eq;  // equivalent resistance
};

// Harvester power p, supply v_max, load drawing `load` at `e` volts. p == 0 means no source.
inline Rc rc(double v_max, double p, double e, double load) {
  const double r_load = e / load;
  if (p == 0.0) return {0.0, r_load};
  const double r_h = v_max * v_max / p;
  return {v_max / r_h, r_load * r_h / (r_load + r_h)};
}

inline double rc_voltage(const Rc& c, double v0, double t, double cap) {
  const double k = std::exp(-t / (c.r_eq * cap));
  return c.i * c.r_eq * (1.0 - k) + v0 * k;
}

struct TinySpec {
  int max_instances = 5;
  int max_slots = 50;
  int max_window = 18;
};

// Random program with up to five instances on at most fifty 10 ms slots,
// priorities, windows and chains drawn at random. Harvest is one of
// {0.1, 1, 5} mW; v_init is close enough to v_min for energy to matter.
inline ehsched::TimeIndexedProgram random_tiny_program(std::mt19937_64& rng, TinySpec spec = {}) {
  using namespace ehsched;
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const double dt = 0.01;
  const int slots = uniform_int(10, spec.max_slots);
  const int n = uniform_int(1, spec.max_instances);
  const double powers[] = {1e-4, 1e-3, 5e-3};

  Grid grid;
  grid.dt = dt;
  grid.slot_count = slots;
  for (int id = 0; id < n; ++id) {
    GriddedInstance g;
    g.instance.id = id;
    g.instance.template_name = "T" + std::to_string(id);
    g.instance.priority = static_cast<double>(uniform_int(1, 10));
    g.instance.current = uniform(1e-3, 1.5e-2);
    g.duration_slots = uniform_int(1, 8);
    g.arrival_slot = uniform_int(0, slots - 1);
    g.latest_start_slot = g.arrival_slot + uniform_int(0, spec.max_window);
    g.instance.exec_time = g.duration_slots * dt;
    g.instance.arrival = g.arrival_slot * dt;
    g.instance.start_deadline = g.latest_start_slot * dt;
    if (id > 0 && uniform_int(0, 2) == 0) g.instance.parents.push_back(uniform_int(0, id - 1));
    if (id > 1 && uniform_int(0, 4) == 0) {
      const int other = uniform_int(0, id - 1);
      if (g.instance.parents.empty() || g.instance.parents.front() != other) g.instance.parents.push_back(other);
    }
    grid.instances.push_back(g);
  }

  CircuitParams circuit;
  circuit.capacitance_farads = uniform_int(0, 1) ? 4.7e-3 : 4.7e-4;
  circuit.v_init = uniform(circuit.v_min, 2.4);
  const double power = powers[uniform_int(0, 2)];
  return build_program(grid, circuit, HarvesterProfile::constant(power, slots * dt));
}

}  // namespace testing
