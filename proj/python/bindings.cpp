#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ehsched/errors.hpp"
#include "ehsched/lookahead.hpp"
#include "ehsched/metrics.hpp"
#include "ehsched/scenario.hpp"
#include "ehsched/scheduler.hpp"
#include "ehsched/simulator.hpp"

namespace py = pybind11;
using namespace ehsched;

namespace {

TimeIndexedProgram full_program(const PreparedScenario& p) {
  return build_program(p.grid, p.scenario.circuit, p.scenario.harvester);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Energy-aware scheduling of task chains on batteryless devices";

  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<InfeasibleProgram>(m, "InfeasibleProgram", PyExc_RuntimeError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);

  py::class_<CircuitParams>(m, "CircuitParams")
      .def(py::init<>())
      .def_readwrite("capacitance_farads", &CircuitParams::capacitance_farads)
      .def_readwrite("v_min", &CircuitParams::v_min)
      .def_readwrite("v_max", &CircuitParams::v_max)
      .def_readwrite("v_init", &CircuitParams::v_init)
      .def_readwrite("operating_voltage", &CircuitParams::operating_voltage)
      .def_readwrite("sleep_current_amps", &CircuitParams::sleep_current_amps)
      .def_readwrite("turn_on_current_amps", &CircuitParams::turn_on_current_amps)
      .def_readwrite("turn_on_time_seconds", &CircuitParams::turn_on_time_seconds)
      .def("validate", &CircuitParams::validate);

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("circuit", &Scenario::circuit)
      .def_readwrite("horizon", &Scenario::horizon)
      .def_readwrite("dt", &Scenario::dt)
      .def_readwrite("v_turn_on", &Scenario::v_turn_on)
      .def_property_readonly("template_names",
                             [](const Scenario& s) {
                               std::vector<std::string> names;
                               for (const auto& t : s.templates) names.push_back(t.name);
                               return names;
                             })
      .def("validate", &Scenario::validate)
      .def("with_constant_harvest", [](const Scenario& s, double watts) { return with_constant_harvest(s, watts); },
           py::arg("watts"))
      .def("to_json", [](const Scenario& s) { return save_scenario(s); });

  m.def("load_scenario", &load_scenario, py::arg("text"), "Parse a scenario from JSON text.");
  m.def("load_scenario_file", &load_scenario_file, py::arg("path"));

  py::class_<TaskInstance>(m, "TaskInstance")
      .def_readonly("id", &TaskInstance::id)
      .def_readonly("template_name", &TaskInstance::template_name)
      .def_readonly("priority", &TaskInstance::priority)
      .def_readonly("exec_time", &TaskInstance::exec_time)
      .def_readonly("current", &TaskInstance::current)
      .def_readonly("arrival", &TaskInstance::arrival)
      .def_readonly("start_deadline", &TaskInstance::start_deadline)
      .def_readonly("parents", &TaskInstance::parents)
      .def("__repr__", [](const TaskInstance& i) {
        return "<TaskInstance " + std::to_string(i.id) + " " + i.template_name + ">";
      });

  py::class_<PreparedScenario>(m, "PreparedScenario")
      .def_readonly("scenario", &PreparedScenario::scenario)
      .def_readonly("instances", &PreparedScenario::instances)
      .def_property_readonly("slot_count", [](const PreparedScenario& p) { return p.grid.slot_count; })
      .def_property_readonly("warnings", [](const PreparedScenario& p) { return p.grid.warnings; });

  m.def("prepare", &prepare, py::arg("scenario"), "Expand the task templates and place them on the slot grid.");

  py::class_<Schedule>(m, "Schedule")
      .def(py::init<>())
      .def_readwrite("starts", &Schedule::starts)
      .def_readwrite("objective", &Schedule::objective)
      .def_readonly("voltage", &Schedule::voltage)
      .def_property_readonly("proven", [](const Schedule& s) { return s.optimality == Optimality::proven; })
      .def_readonly("upper_bound", &Schedule::upper_bound)
      .def_readonly("gap", &Schedule::gap);

  m.def(
      "solve",
      [](const PreparedScenario& p, double time_limit) {
        const auto program = full_program(p);
        py::gil_scoped_release release;
        return solve_exact(program, SolveOptions{time_limit});
      },
      py::arg("prepared"), py::arg("time_limit") = 1800.0, "Exact full-horizon schedule.");

  m.def(
      "solve_windowed",
      [](const PreparedScenario& p, double window, double time_limit) {
        py::gil_scoped_release release;
        return solve_windowed(p, window, SolveOptions{time_limit}).stitched;
      },
      py::arg("prepared"), py::arg("window_seconds"), py::arg("time_limit") = 1800.0,
      "Stitched schedule from consecutive look-ahead windows.");

  py::class_<Violation>(m, "Violation")
      .def_readonly("constraint", &Violation::constraint)
      .def_readonly("slot", &Violation::slot)
      .def_readonly("instance_id", &Violation::instance_id)
      .def_readonly("message", &Violation::message)
      .def("__repr__", [](const Violation& v) { return "<Violation " + v.constraint + " @" + std::to_string(v.slot) + ">"; });

  m.def(
      "verify",
      [](const Schedule& s, const PreparedScenario& p) { return verify_schedule(s, full_program(p)).violations; },
      py::arg("schedule"), py::arg("prepared"), "Constraint violations of a schedule; empty when feasible.");

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("dt", &SimTrace::dt)
      .def_property_readonly("times", [](const SimTrace& t) {
        std::vector<double> v;
        for (const auto& r : t.slots) v.push_back(r.time);
        return v;
      })
      .def_property_readonly("voltages", [](const SimTrace& t) {
        std::vector<double> v;
        for (const auto& r : t.slots) v.push_back(r.voltage);
        return v;
      })
      .def_property_readonly("modes", [](const SimTrace& t) {
        std::vector<std::string> v;
        for (const auto& r : t.slots) v.emplace_back(to_string(r.mode));
        return v;
      })
      .def_property_readonly("completions", [](const SimTrace& t) {
        std::vector<std::pair<int, int>> v;
        for (const auto& c : t.completions) v.emplace_back(c.instance_id, c.slot);
        return v;
      })
      .def_property_readonly("failure_times", [](const SimTrace& t) {
        std::vector<double> v;
        for (std::size_t k = 0; k < t.power_failures.size(); ++k) v.push_back(t.failure_time(k));
        return v;
      })
      .def("to_csv", [](const SimTrace& t) { return save_trace(t); });

  m.def("simulate_schedule", &simulate_schedule, py::arg("schedule"), py::arg("prepared"));
  m.def(
      "simulate_ink",
      [](const PreparedScenario& p, std::optional<double> v_turn_on, bool run_expired) {
        return simulate_policy(PolicyInk{v_turn_on.value_or(p.scenario.v_turn_on), run_expired}, p);
      },
      py::arg("prepared"), py::arg("v_turn_on") = py::none(), py::arg("run_expired") = false,
      "Energy-unaware priority scheduler baseline.");

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("task_success_rate", &Metrics::task_success_rate)
      .def_readonly("priority_success_rate", &Metrics::priority_success_rate)
      .def_readonly("power_failures", &Metrics::power_failures)
      .def_readonly("on_time_seconds", &Metrics::on_time_seconds)
      .def_readonly("completed", &Metrics::completed)
      .def_readonly("total", &Metrics::total)
      .def_readonly("objective", &Metrics::objective)
      .def("to_json", [](const Metrics& mm) { return save_metrics(mm); });

  m.def(
      "compute_metrics",
      [](const SimTrace& t, const PreparedScenario& p) { return compute_metrics(t, p.instances); },
      py::arg("trace"), py::arg("prepared"));

  m.def(
      "sweep_windows",
      [](const PreparedScenario& p, const std::vector<double>& sizes, double time_limit) {
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = sweep_windows(p, sizes, SolveOptions{time_limit});
        }
        return save_sweep(rows);
      },
      py::arg("prepared"), py::arg("window_sizes"), py::arg("time_limit") = 1800.0,
      "Window sweep as CSV text, with the full-horizon row last.");

  m.def(
      "voltage_step",
      [](double v0, double dt, double harvest_watts, double load_amps, const CircuitParams& c) {
        const auto source = harvester_for_power(c.v_max, harvest_watts);
        return voltage_step(v0, dt, load_equivalent(c.operating_voltage, load_amps, source), c.capacitance_farads);
      },
      py::arg("v0"), py::arg("dt"), py::arg("harvest_watts"), py::arg("load_amps"), py::arg("circuit") = CircuitParams{},
      "Capacitor voltage after dt seconds under a fixed load.");
}
