#include <doctest.h>

#include <algorithm>
#include <random>

#include "ehsched/errors.hpp"
#include "ehsched/scenario.hpp"
#include "ehsched/scheduler.hpp"
#include "support.hpp"

using namespace ehsched;

namespace {

struct Spec {
  double priority;
  double current;
  int arrival;
  int latest;
  int duration;
  std::vector<int> parents = {};
};

TimeIndexedProgram make_program(const std::vector<Spec>& specs, int slots, double power = 5e-3, double v_init = 2.2,
                                double cap = 4.7e-3) {
  Grid grid;
  grid.dt = 0.01;
  grid.slot_count = slots;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    GriddedInstance g;
    g.instance.id = static_cast<int>(k);
    g.instance.template_name = "T" + std::to_string(k);
    g.instance.priority = specs[k].priority;
    g.instance.current = specs[k].current;
    g.instance.parents = specs[k].parents;
    g.arrival_slot = specs[k].arrival;
    g.latest_start_slot = specs[k].latest;
    g.duration_slots = specs[k].duration;
    grid.instances.push_back(g);
  }
  CircuitParams c;
  c.v_init = v_init;
  c.capacitance_farads = cap;
  return build_program(grid, c, HarvesterProfile::constant(power, slots * 0.01));
}

}  // namespace

TEST_CASE("program shape for the Smart Building scenario") {
  const auto p = prepare(testing::smart_building());
  const auto program = build_program(p.grid, p.scenario.circuit, p.scenario.harvester);
  CHECK(program.instances.size() == 41);
  CHECK(program.slot_count() >= 1519);
  CHECK(program.instances.front().domain_size() == 34);
  CHECK(program.load_currents.front() == p.scenario.circuit.sleep_current_amps);
  for (const auto& inst : program.instances) {
    CHECK(inst.first_start >= 0);
    CHECK(inst.last_start + inst.duration <= program.end_slot);
  }
}

TEST_CASE("zero instances give the empty schedule") {
  const auto program = make_program({}, 20);
  const Schedule s = solve_exact(program);
  CHECK(s.starts.empty());
  CHECK(s.objective == 0.0);
  CHECK(s.voltage.size() == 20);
  CHECK(brute_force(program).objective == 0.0);
}

TEST_CASE("single binary choice") {
  const auto program = make_program({{4, 2e-3, 5, 5, 3}}, 20);
  const Schedule s = solve_exact(program);
  REQUIRE(s.starts.size() == 1);
  CHECK(s.starts.at(0) == 5);
  CHECK(s.objective == 4.0);
}

TEST_CASE("exclusive instances: the higher priority wins") {
  const auto program = make_program({{3, 2e-3, 0, 0, 1}, {10, 2e-3, 0, 0, 1}}, 10);
  const Schedule s = solve_exact(program);
  CHECK(s.objective == 10.0);
  CHECK(s.starts.count(1) == 1);
  CHECK(brute_force(program).starts == s.starts);
}

TEST_CASE("child whose window closes before the parent can finish is dropped") {
  const auto program = make_program({{2, 2e-3, 0, 0, 5}, {5, 2e-3, 0, 3, 2, {0}}}, 20);
  const Schedule s = solve_exact(program);
  CHECK(s.starts == std::map<int, int>{{0, 0}});
  CHECK(brute_force(program).starts == s.starts);
}

TEST_CASE("three-instance chain with tight windows matches the oracle") {
  const auto program = make_program({{1, 4e-3, 0, 2, 3}, {2, 9e-3, 3, 6, 4, {0}}, {3, 4e-3, 7, 12, 3, {1}}}, 20);
  const Schedule s = solve_exact(program);
  const Schedule b = brute_force(program);
  CHECK(s.objective == 6.0);
  CHECK(s.starts == b.starts);
  CHECK(s.starts == std::map<int, int>{{0, 0}, {1, 3}, {2, 7}});
}

TEST_CASE("ties break towards the earliest start vector") {
  const auto program = make_program({{5, 2e-3, 2, 8, 2}, {5, 2e-3, 2, 8, 2}}, 20);
  const Schedule s = solve_exact(program);
  CHECK(s.starts == std::map<int, int>{{0, 2}, {1, 4}});
  CHECK(brute_force(program).starts == s.starts);
}

TEST_CASE("no harvest and v_init at v_min: only sleeping is feasible") {
  const auto program = make_program({{1, 1e-3, 0, 10, 1}, {9, 5e-3, 3, 12, 2}}, 20, 0.0, 1.8);
  const Schedule s = solve_exact(program);
  CHECK(s.starts.empty());
  CHECK(brute_force(program).starts.empty());
  CHECK(verify_schedule(s, program).ok());
}

TEST_CASE("solver errors") {
  const auto program = make_program({{1, 1e-3, 0, 10, 1}}, 20);
  CHECK_THROWS_AS(solve_exact(program, SolveOptions{0.0}), InvalidParameter);
  CHECK_THROWS_AS(solve_exact(program, SolveOptions{-1.0}), InvalidParameter);
  const auto low = make_program({{1, 1e-3, 0, 140, 1}}, 150, 5e-3, 1.7);
  CHECK_THROWS_AS(solve_exact(low), InfeasibleProgram);
  // From a carried state below v_min the device waits for the voltage to recover.
  const Schedule waited = solve_from_state(low);
  REQUIRE(waited.starts.size() == 1);
  CHECK(waited.starts.at(0) > 0);
  CHECK(verify_schedule(waited, low).ok());
}

TEST_CASE("oracle refuses large programs") {
  std::vector<Spec> seven(7, Spec{1, 1e-3, 0, 5, 1});
  CHECK_THROWS_AS(brute_force(make_program(seven, 20)), OracleTooLarge);
  std::vector<Spec> wide(6, Spec{1, 1e-3, 0, 40, 1});
  CHECK_THROWS_AS(brute_force(make_program(wide, 50)), OracleTooLarge);
}

TEST_CASE("time-limited solve reports a bound and a gap") {
  const auto p = prepare(testing::smart_building());
  const auto program = build_program(p.grid, p.scenario.circuit, p.scenario.harvester);
  const Schedule s = solve_exact(program, SolveOptions{1e-9});
  CHECK(s.optimality == Optimality::time_limited);
  CHECK(s.upper_bound >= s.objective);
  CHECK(s.upper_bound <= 207.0);
  CHECK(s.gap >= 0.0);
  CHECK(s.gap <= 1.0);
  CHECK(verify_schedule(s, program).ok());
}

TEST_CASE("random tiny programs: solver equals oracle") {
  std::mt19937_64 rng(20240601);
  for (int k = 0; k < 60; ++k) {
    const auto program = testing::random_tiny_program(rng);
    const Schedule s = solve_exact(program);
    const Schedule b = brute_force(program);
    INFO("program " << k);
    CHECK(s.objective == b.objective);
    CHECK(s.starts == b.starts);
    CHECK(verify_schedule(s, program).ok());
  }
}

TEST_CASE("scaling priorities keeps the schedule") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 25; ++k) {
    auto program = testing::random_tiny_program(rng);
    const Schedule base = solve_exact(program);
    for (auto& inst : program.instances) inst.priority *= 3.5;
    const Schedule scaled = solve_exact(program);
    CHECK(scaled.starts == base.starts);
    CHECK(scaled.objective == doctest::Approx(3.5 * base.objective));
  }
}

TEST_CASE("more harvested power never lowers the optimum") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto base = testing::random_tiny_program(rng);
    double previous = -1.0;
    for (double p : {0.0, 1e-4, 1e-3, 5e-3, 2e-2}) {
      Grid grid;
      grid.dt = base.dt;
      grid.slot_count = base.slot_count();
      for (const auto& inst : base.instances) {
        GriddedInstance g;
        g.instance.id = inst.id;
        g.instance.priority = inst.priority;
        g.instance.current = inst.current;
        for (int parent : inst.parents) g.instance.parents.push_back(base.instances[static_cast<std::size_t>(parent)].id);
        g.arrival_slot = inst.first_start;
        g.latest_start_slot = inst.last_start;
        g.duration_slots = inst.duration;
        grid.instances.push_back(g);
      }
      const auto program = build_program(grid, base.circuit, HarvesterProfile::constant(p, 1.0));
      const double objective = solve_exact(program).objective;
      CHECK(objective >= previous);
      previous = objective;
    }
  }
}

TEST_CASE("removing an instance never raises the optimum") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 20; ++k) {
    const auto program = testing::random_tiny_program(rng);
    const double full = solve_exact(program).objective;
    for (std::size_t drop = 0; drop < program.instances.size(); ++drop) {
      Grid grid;
      grid.dt = program.dt;
      grid.slot_count = program.slot_count();
      for (std::size_t j = 0; j < program.instances.size(); ++j) {
        const auto& inst = program.instances[j];
        // Dropping a parent removes its descendants' precedence source; keep them but make them unschedulable.
        GriddedInstance g;
        g.instance.id = inst.id;
        g.instance.priority = inst.priority;
        g.instance.current = inst.current;
        for (int parent : inst.parents) g.instance.parents.push_back(program.instances[static_cast<std::size_t>(parent)].id);
        g.arrival_slot = inst.first_start;
        g.latest_start_slot = j == drop ? -1 : inst.last_start;
        g.duration_slots = inst.duration;
        grid.instances.push_back(g);
      }
      const auto reduced = build_program(grid, program.circuit, HarvesterProfile::constant(program.harvest_power[0], 1.0));
      CHECK(solve_exact(reduced).objective <= full);
    }
  }
}

TEST_CASE("verifier flags overlapping tasks") {
  const auto program = make_program({{1, 2e-3, 0, 10, 3}, {1, 2e-3, 0, 10, 3}}, 20);
  Schedule s;
  s.starts = {{0, 2}, {1, 4}};
  s.objective = 2.0;
  const auto report = verify_schedule(s, program);
  CHECK(report.count("exclusivity") == 1);
  const auto it = std::find_if(report.violations.begin(), report.violations.end(),
                               [](const Violation& v) { return v.constraint == "exclusivity"; });
  CHECK(it->slot == 4);
}

TEST_CASE("verifier flags windows, precedence, horizon and objective") {
  const auto program = make_program({{1, 2e-3, 5, 8, 3}, {2, 2e-3, 0, 18, 3, {0}}}, 20);
  Schedule s;
  s.starts = {{0, 9}, {1, 18}};
  s.objective = 7.0;
  const auto report = verify_schedule(s, program);
  CHECK(report.count("start window") >= 1);
  CHECK(report.count("horizon") == 1);
  CHECK(report.count("objective") == 1);

  Schedule early;
  early.starts = {{0, 5}, {1, 6}};
  early.objective = 3.0;
  CHECK(verify_schedule(early, program).count("precedence") == 1);

  Schedule orphan;
  orphan.starts = {{1, 0}};
  orphan.objective = 2.0;
  CHECK(verify_schedule(orphan, program).count("precedence") == 1);

  Schedule unknown;
  unknown.starts = {{42, 0}};
  CHECK(verify_schedule(unknown, program).count("unknown instance") == 1);
}

TEST_CASE("verifier catches a Tx that drains the capacitor below v_min") {
  // Tx (19 slots, 4.36 mA) from 1.85 V with 0.1 mW of harvest.
  const auto program = make_program({{3, 4.36e-3, 0, 0, 19}}, 30, 1e-4, 1.85);
  Schedule s;
  s.starts = {{0, 0}};
  s.objective = 3.0;
  const auto report = verify_schedule(s, program);
  CHECK(report.count("voltage lower bound") > 0);
  const auto tx = testing::rc(3.3, 1e-4, 3.3, 4.36e-3);
  const double end = testing::rc_voltage(tx, 1.85, 0.19, 4.7e-3);
  CHECK(report.recomputed_voltage[18] == doctest::Approx(end).epsilon(1e-12));
  CHECK(end < 1.8);
  int first_low = 0;
  while (testing::rc_voltage(tx, 1.85, (first_low + 1) * 0.01, 4.7e-3) >= 1.8) ++first_low;
  const auto low = std::find_if(report.violations.begin(), report.violations.end(),
                                [](const Violation& v) { return v.constraint == "voltage lower bound"; });
  CHECK(low->slot == first_low);
  CHECK(solve_exact(program).starts.empty());
}

TEST_CASE("verifier flags a tampered voltage trajectory") {
  const auto program = make_program({{1, 2e-3, 0, 10, 3}}, 20);
  Schedule s = solve_exact(program);
  REQUIRE(verify_schedule(s, program).ok());
  s.voltage[7] += 1e-3;
  CHECK(verify_schedule(s, program).count("voltage recursion") == 1);
}

TEST_CASE("voltage trajectory follows the closed form") {
  const auto program = make_program({{1, 9e-3, 0, 0, 5}}, 10, 1e-3, 2.0);
  const auto v = voltage_trajectory(program, {{0, 0}});
  const auto task = testing::rc(3.3, 1e-3, 3.3, 9e-3);
  const auto sleep = testing::rc(3.3, 1e-3, 3.3, 1e-4);
  const double after_task = testing::rc_voltage(task, 2.0, 0.05, 4.7e-3);
  CHECK(v[4] == doctest::Approx(after_task).epsilon(1e-12));
  CHECK(v[9] == doctest::Approx(testing::rc_voltage(sleep, after_task, 0.05, 4.7e-3)).epsilon(1e-12));
}

TEST_CASE("window programs") {
  const auto p = prepare(testing::smart_building());
  const auto& c = p.scenario.circuit;
  const auto w = build_window_program(p.grid, c, p.scenario.harvester, ProgramWindow{100, 200, 2.0, {}, {}});
  CHECK(w.begin_slot == 100);
  CHECK(w.v_init == 2.0);
  for (const auto& inst : w.instances) {
    CHECK(inst.first_start >= 100);
    CHECK(inst.last_start + inst.duration <= 200);
  }
  // Request(1 s) is offered; its Response is offered too because the parent is in the same program.
  CHECK(w.local_index(2) >= 0);
  CHECK(w.local_index(3) >= 0);
  const auto without = build_window_program(p.grid, c, p.scenario.harvester, ProgramWindow{100, 200, 2.0, {}, {2}});
  CHECK(without.local_index(2) < 0);
  CHECK(without.local_index(3) < 0);
  const auto done = build_window_program(p.grid, c, p.scenario.harvester, ProgramWindow{100, 200, 2.0, {2}, {}});
  CHECK(done.local_index(2) < 0);
  CHECK(done.local_index(3) >= 0);
  CHECK(done.instances[static_cast<std::size_t>(done.local_index(3))].parents.empty());
  CHECK_THROWS_AS(build_window_program(p.grid, c, p.scenario.harvester, ProgramWindow{50, 50, 2.0, {}, {}}),
                  InvalidParameter);
}
