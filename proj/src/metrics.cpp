#include "ehsched/metrics.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ehsched/errors.hpp"

namespace ehsched {

namespace {

std::string format(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

}  // namespace

Metrics compute_metrics(const SimTrace& trace, std::span<const TaskInstance> instances) {
  std::map<int, double> priority;
  double total_priority = 0.0;
  for (const auto& inst : instances) {
    priority.emplace(inst.id, inst.priority);
    total_priority += inst.priority;
  }
  std::set<int> done;
  for (const auto& c : trace.completions) {
    if (!priority.contains(c.instance_id))
      throw InvalidParameter("trace completes unknown instance " + std::to_string(c.instance_id));
    if (!c.late) done.insert(c.instance_id);
  }

  Metrics m;
  m.total = static_cast<int>(instances.size());
  m.completed = static_cast<int>(done.size());
  for (const auto& inst : instances)
    if (done.contains(inst.id)) m.objective += inst.priority;
  if (m.total > 0) {
    m.task_success_rate = static_cast<double>(m.completed) / static_cast<double>(m.total);
    m.priority_success_rate = m.objective / total_priority;
  }
  m.power_failures = static_cast<int>(trace.power_failures.size());
  int on_slots = 0;
  for (std::size_t s = 0; s < trace.slots.size() && static_cast<int>(s) < trace.horizon_slots; ++s)
    if (trace.slots[s].mode != DeviceMode::off) ++on_slots;
  m.on_time_seconds = static_cast<double>(on_slots) * trace.dt;
  return m;
}

std::string save_trace(const SimTrace& trace) {
  std::ostringstream out;
  out << "time_s,voltage_v,mode,active_task\n";
  for (const auto& r : trace.slots) {
    out << format("%.6f", r.time) << ',' << format("%.9f", r.voltage) << ',' << to_string(r.mode) << ',';
    if (r.active_instance >= 0) out << r.active_instance;
    out << '\n';
  }
  return out.str();
}

std::string save_metrics(const Metrics& m) {
  nlohmann::ordered_json j;
  j["task_success_rate"] = m.task_success_rate;
  j["priority_success_rate"] = m.priority_success_rate;
  j["power_failures"] = m.power_failures;
  j["on_time_seconds"] = m.on_time_seconds;
  j["completed"] = m.completed;
  j["total"] = m.total;
  j["objective"] = m.objective;
  return j.dump(2) + "\n";
}

std::string save_schedule(const Schedule& schedule, const PreparedScenario& prepared) {
  std::ostringstream out;
  out << "instance_id,template,start_slot,start_time_s\n";
  for (const auto& [id, start] : schedule.starts) {
    const auto& inst = prepared.instances.at(static_cast<std::size_t>(id));
    out << id << ',' << inst.template_name << ',' << start << ','
        << format("%.6f", static_cast<double>(start) * prepared.grid.dt) << '\n';
  }
  return out.str();
}

Schedule load_schedule(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("instance_id,", 0) != 0)
    throw InvalidParameter("schedule: missing header");
  Schedule schedule;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, name, slot;
    if (!std::getline(row, id, ',') || !std::getline(row, name, ',') || !std::getline(row, slot, ','))
      throw InvalidParameter("schedule line " + std::to_string(line_no) + ": expected 4 columns");
    try {
      if (!schedule.starts.emplace(std::stoi(id), std::stoi(slot)).second)
        throw InvalidParameter("schedule line " + std::to_string(line_no) + ": duplicate instance");
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const InvalidParameter*>(&e)) throw;
      throw InvalidParameter("schedule line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return schedule;
}

}  // namespace ehsched
