#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>

#include "ehsched/errors.hpp"
#include "ehsched/lookahead.hpp"
#include "ehsched/metrics.hpp"
#include "ehsched/scenario.hpp"
#include "ehsched/scheduler.hpp"
#include "ehsched/simulator.hpp"

namespace ehsched::cli {

namespace fs = std::filesystem;

namespace {

/// Raised for a missing input file; maps to kNotFound.
struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a schedule fails verification; maps to kViolations.
struct Violations : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioArgs {
  std::string path;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<double> v_turn_on;
  std::optional<double> v_init;
  std::optional<double> harvest_mw;
  std::optional<double> capacitance_mf;

  void add_to(CLI::App& cmd) {
    cmd.add_option("-s,--scenario", path, "Scenario JSON file")->required();
    cmd.add_option("--dt", dt, "Slot length in seconds");
    cmd.add_option("--horizon", horizon, "Horizon in seconds");
    cmd.add_option("--v-turn-on", v_turn_on, "Reboot threshold after a power failure (V)");
    cmd.add_option("--v-init", v_init, "Initial capacitor voltage (V)");
    cmd.add_option("--harvest-mw", harvest_mw, "Constant harvested power (mW), replaces the profile");
    cmd.add_option("--capacitance-mf", capacitance_mf, "Capacitance (mF)");
  }

  Scenario load() const {
    if (!fs::exists(path)) throw NotFound("scenario not found: " + path);
    Scenario sc = load_scenario_file(path);
    if (dt) sc.dt = *dt;
    if (horizon) {
      sc.horizon = *horizon;
      sc.harvester.horizon = *horizon;
    }
    if (v_turn_on) sc.v_turn_on = *v_turn_on;
    if (v_init) sc.circuit.v_init = *v_init;
    if (harvest_mw) sc = with_constant_harvest(sc, *harvest_mw * 1e-3);
    if (capacitance_mf) sc.circuit.capacitance_farads = *capacitance_mf * 1e-3;
    sc.validate();
    return sc;
  }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("file not found: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string save_events(const SimTrace& trace) {
  std::ostringstream out;
  out << "event,slot,time_s,instance_id\n";
  struct Row {
    int slot;
    int order;
    std::string line;
  };
  std::vector<Row> rows;
  for (const auto& c : trace.completions)
    rows.push_back({c.slot, 0, (c.late ? "late_completion," : "completion,") + std::to_string(c.slot) + "," +
                                   fmt("%.6f", (c.slot + 1) * trace.dt) + "," + std::to_string(c.instance_id)});
  for (int s : trace.power_failures)
    rows.push_back({s, 1, "power_failure," + std::to_string(s) + "," + fmt("%.6f", (s + 1) * trace.dt) + ","});
  for (int s : trace.turn_ons)
    rows.push_back({s, 2, "turn_on," + std::to_string(s) + "," + fmt("%.6f", s * trace.dt) + ","});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return std::tie(a.slot, a.order) < std::tie(b.slot, b.order); });
  for (const auto& r : rows) out << r.line << '\n';
  return out.str();
}

void print_violations(const FeasibilityReport& report, std::ostream& err) {
  for (const auto& v : report.violations) {
    err << "violation: " << v.constraint;
    if (v.slot >= 0) err << " at slot " << v.slot;
    if (v.instance_id >= 0) err << " (instance " << v.instance_id << ")";
    if (!v.message.empty()) err << ": " << v.message;
    err << '\n';
  }
}

struct Outcome {
  std::string label;
  Metrics metrics;
  SimTrace trace;
};

Outcome write_outcome(const std::string& label, const SimTrace& trace, const PreparedScenario& prepared,
                      const fs::path& dir) {
  Outcome o{label, compute_metrics(trace, prepared.instances), trace};
  write_file(dir / (label + "_trace.csv"), save_trace(trace));
  write_file(dir / (label + "_events.csv"), save_events(trace));
  write_file(dir / (label + "_metrics.json"), save_metrics(o.metrics));
  return o;
}

std::string comparison_table(const std::vector<Outcome>& outcomes) {
  std::ostringstream out;
  out << "scheduler,completed,total,task_success_rate,priority_success_rate,power_failures,on_time_s,failure_times_s\n";
  for (const auto& o : outcomes) {
    out << o.label << ',' << o.metrics.completed << ',' << o.metrics.total << ','
        << fmt("%.6f", o.metrics.task_success_rate) << ',' << fmt("%.6f", o.metrics.priority_success_rate) << ','
        << o.metrics.power_failures << ',' << fmt("%.2f", o.metrics.on_time_seconds) << ',';
    for (std::size_t k = 0; k < o.trace.power_failures.size(); ++k)
      out << (k ? ";" : "") << fmt("%.2f", o.trace.failure_time(k));
    out << '\n';
  }
  return out.str();
}

void print_table(const std::vector<Outcome>& outcomes, std::ostream& out) {
  out << std::left << std::setw(10) << "scheduler" << std::right << std::setw(12) << "completed" << std::setw(12)
      << "task rate" << std::setw(12) << "prio rate" << std::setw(10) << "failures" << std::setw(10) << "on (s)"
      << "  failure times (s)\n";
  for (const auto& o : outcomes) {
    out << std::left << std::setw(10) << o.label << std::right << std::setw(12)
        << (std::to_string(o.metrics.completed) + "/" + std::to_string(o.metrics.total)) << std::setw(12)
        << fmt("%.3f", o.metrics.task_success_rate) << std::setw(12) << fmt("%.3f", o.metrics.priority_success_rate)
        << std::setw(10) << o.metrics.power_failures << std::setw(10) << fmt("%.2f", o.metrics.on_time_seconds)
        << " ";
    for (std::size_t k = 0; k < o.trace.power_failures.size(); ++k) out << ' ' << fmt("%.2f", o.trace.failure_time(k));
    out << '\n';
  }
}

struct RunArgs {
  ScenarioArgs scenario;
  std::string scheduler = "both";
  std::optional<double> window;
  double time_limit = 1800.0;
  bool run_expired = false;
  std::string out_dir;
};

int do_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  const Scenario sc = args.scenario.load();
  const PreparedScenario prepared = prepare(sc);
  const fs::path dir = args.out_dir;
  fs::create_directories(dir);
  const SolveOptions options{args.time_limit};
  std::vector<Outcome> outcomes;

  if (args.scheduler != "ink") {
    const TimeIndexedProgram program = build_program(prepared.grid, sc.circuit, sc.harvester);
    Schedule schedule;
    if (args.window) {
      const WindowPlan plan = solve_windowed(prepared, *args.window, options);
      std::ostringstream windows;
      windows << "window,begin_s,end_s,v_start,candidates,scheduled,objective\n";
      for (std::size_t k = 0; k < plan.windows.size(); ++k) {
        const auto& w = plan.windows[k];
        windows << k << ',' << fmt("%.6f", w.begin_slot * prepared.grid.dt) << ','
                << fmt("%.6f", w.end_slot * prepared.grid.dt) << ',' << fmt("%.9f", w.v_start) << ','
                << w.candidates << ',' << w.schedule.starts.size() << ',' << fmt("%.6g", w.schedule.objective) << '\n';
      }
      write_file(dir / "eaware_windows.csv", windows.str());
      const Schedule full = solve_exact(program, options);
      const bool dominated = full.objective >= plan.stitched.objective || objective_equal(full.objective, plan.stitched.objective);
      std::ostringstream log;
      log << "window_s " << *args.window << "\nwindows " << plan.windows.size() << "\nfull_horizon_objective "
          << full.objective << "\nwindowed_objective " << plan.stitched.objective << "\ndominance "
          << (dominated ? "ok" : "VIOLATED") << '\n';
      write_file(dir / "dominance.txt", log.str());
      out << "dominance check: full-horizon " << full.objective << " >= windowed " << plan.stitched.objective << ": "
          << (dominated ? "ok" : "VIOLATED") << '\n';
      if (!dominated) throw std::runtime_error("windowed objective exceeds the full-horizon optimum");
      schedule = plan.stitched;
    } else {
      schedule = solve_exact(program, options);
    }
    if (schedule.optimality == Optimality::time_limited)
      out << "solver hit the time limit; objective " << schedule.objective << ", bound " << schedule.upper_bound
          << ", gap " << fmt("%.4f", schedule.gap) << '\n';
    const FeasibilityReport report = verify_schedule(schedule, program);
    write_file(dir / "eaware_schedule.csv", save_schedule(schedule, prepared));
    if (!report.ok()) {
      print_violations(report, err);
      throw Violations("computed schedule failed verification");
    }
    outcomes.push_back(write_outcome("eaware", simulate_schedule(schedule, prepared), prepared, dir));
  }

  if (args.scheduler != "eaware") {
    PolicyInk policy{sc.v_turn_on, args.run_expired};
    outcomes.push_back(write_outcome("ink", simulate_policy(policy, prepared), prepared, dir));
  }

  if (outcomes.size() > 1) write_file(dir / "comparison.csv", comparison_table(outcomes));
  print_table(outcomes, out);
  return kOk;
}

struct SweepArgs {
  ScenarioArgs scenario;
  std::vector<double> windows;
  double time_limit = 1800.0;
  std::string out_file;
};

int do_sweep(const SweepArgs& args, std::ostream& out) {
  const Scenario sc = args.scenario.load();
  const PreparedScenario prepared = prepare(sc);
  const std::vector<SweepRow> rows = sweep_windows(prepared, args.windows, SolveOptions{args.time_limit});
  const std::string csv = save_sweep(rows);
  if (args.out_file.empty()) {
    out << csv;
  } else {
    write_file(args.out_file, csv);
    out << "window (s)  windows  tasks/window  prio rate  completed\n";
    for (const auto& r : rows) {
      out << std::setw(10) << (r.full_horizon ? "full" : fmt("%g", r.window_seconds)) << std::setw(9) << r.windows
          << std::setw(14) << fmt("%.2f", r.mean_instances_per_window) << std::setw(11)
          << fmt("%.4f", r.metrics.priority_success_rate) << std::setw(11)
          << (std::to_string(r.metrics.completed) + "/" + std::to_string(r.metrics.total)) << '\n';
    }
  }
  return kOk;
}

struct VerifyArgs {
  ScenarioArgs scenario;
  std::string schedule_file;
};

int do_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  const Scenario sc = args.scenario.load();
  const PreparedScenario prepared = prepare(sc);
  const TimeIndexedProgram program = build_program(prepared.grid, sc.circuit, sc.harvester);
  Schedule schedule = load_schedule(read_file(args.schedule_file));
  for (const auto& [id, start] : schedule.starts) {
    const int j = program.local_index(id);
    if (j >= 0) schedule.objective += program.instances[static_cast<std::size_t>(j)].priority;
  }
  const FeasibilityReport report = verify_schedule(schedule, program);
  if (!report.ok()) {
    print_violations(report, err);
    err << report.violations.size() << " violation(s)\n";
    return kViolations;
  }
  out << "ok: " << schedule.starts.size() << " starts, objective " << schedule.objective << '\n';
  return kOk;
}

struct ExpandArgs {
  ScenarioArgs scenario;
  std::string out_file;
};

int do_expand(const ExpandArgs& args, std::ostream& out) {
  const PreparedScenario prepared = prepare(args.scenario.load());
  std::ostringstream csv;
  csv << "instance_id,template,priority,arrival_s,start_deadline_s,exec_time_s,current_a,arrival_slot,"
         "latest_start_slot,duration_slots,parents\n";
  for (const auto& g : prepared.grid.instances) {
    const TaskInstance& i = g.instance;
    csv << i.id << ',' << i.template_name << ',' << fmt("%g", i.priority) << ',' << fmt("%.6f", i.arrival) << ','
        << fmt("%.6f", i.start_deadline) << ',' << fmt("%.6f", i.exec_time) << ',' << fmt("%.6g", i.current) << ','
        << g.arrival_slot << ',' << g.latest_start_slot << ',' << g.duration_slots << ',';
    for (std::size_t k = 0; k < i.parents.size(); ++k) csv << (k ? ";" : "") << i.parents[k];
    csv << '\n';
  }
  if (args.out_file.empty())
    out << csv.str();
  else
    write_file(args.out_file, csv.str());
  for (const auto& w : prepared.grid.warnings) out << "warning: " << w << '\n';
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-aware task scheduling for batteryless devices"};
  app.name("ehsched");
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Schedule a scenario and simulate it");
  run.scenario.add_to(*run_cmd);
  run_cmd->add_option("--scheduler", run.scheduler, "eaware, ink or both")
      ->check(CLI::IsMember({"eaware", "ink", "both"}))
      ->capture_default_str();
  run_cmd->add_option("--window", run.window, "Look-ahead window in seconds (default: full horizon)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--time-limit", run.time_limit, "Solver time limit in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd->add_flag("--ink-run-expired", run.run_expired,
                    "Let the InK baseline run instances after their start deadline (late runs are not successes)");
  run_cmd->add_option("-o,--out", run.out_dir, "Output directory")->required();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Windowed look-ahead sweep");
  sweep.scenario.add_to(*sweep_cmd);
  sweep_cmd->add_option("-w,--windows", sweep.windows, "Window sizes in seconds")
      ->delimiter(',')
      ->required()
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--time-limit", sweep.time_limit, "Solver time limit per solve in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_cmd->add_option("-o,--out", sweep.out_file, "CSV file (default: stdout)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Re-check a saved schedule against the scenario");
  verify.scenario.add_to(*verify_cmd);
  verify_cmd->add_option("--schedule", verify.schedule_file, "Schedule CSV written by run")->required();

  ExpandArgs expand;
  auto* expand_cmd = app.add_subcommand("expand", "List the task instances of a scenario");
  expand.scenario.add_to(*expand_cmd);
  expand_cmd->add_option("-o,--out", expand.out_file, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return do_run(run, out, err);
    if (*sweep_cmd) return do_sweep(sweep, out);
    if (*verify_cmd) return do_verify(verify, out, err);
    return do_expand(expand, out);
  } catch (const NotFound& e) {
    err << "error: " << e.what() << '\n';
    return kNotFound;
  } catch (const ScenarioError& e) {
    err << "error: invalid scenario: " << e.what() << '\n';
    return kInvalidScenario;
  } catch (const InfeasibleProgram& e) {
    err << "error: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const Violations& e) {
    err << "error: " << e.what() << '\n';
    return kViolations;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace ehsched::cli
