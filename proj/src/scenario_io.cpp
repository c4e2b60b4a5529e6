#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ehsched/errors.hpp"
#include "ehsched/scenario.hpp"

namespace ehsched {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class Reader {
public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ScenarioError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json& child(const std::string& key) const {
    auto it = node_.find(key);
    if (it == node_.end()) throw ScenarioError(field(key), "missing field");
    return *it;
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  double number(const std::string& key) const {
    const json& v = child(key);
    if (!v.is_number()) throw ScenarioError(field(key), "expected a number");
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::string string(const std::string& key) const {
    const json& v = child(key);
    if (!v.is_string()) throw ScenarioError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
  const json& node_;
  std::string path_;
};

Trigger parse_trigger(const json& node, const std::string& path) {
  const Reader r(node, path);
  const std::string type = r.string("type");
  if (type == "periodic") return Periodic{r.number("first_arrival_s"), r.number("period_s")};
  if (type == "after_parent") return AfterParent{r.string("parent")};
  if (type == "after_count") {
    const double k = r.number("count");
    if (k < 1 || k != static_cast<double>(static_cast<int>(k)))
      throw ScenarioError(r.field("count"), "count must be a positive integer");
    return AfterCount{r.string("parent"), static_cast<int>(k)};
  }
  throw ScenarioError(r.field("type"), "unknown trigger type '" + type + "'");
}

ordered_json trigger_json(const Trigger& trigger) {
  ordered_json j;
  if (const auto* p = std::get_if<Periodic>(&trigger)) {
    j["type"] = "periodic";
    j["first_arrival_s"] = p->first_arrival;
    j["period_s"] = p->period;
  } else if (const auto* a = std::get_if<AfterParent>(&trigger)) {
    j["type"] = "after_parent";
    j["parent"] = a->parent;
  } else {
    const auto& c = std::get<AfterCount>(trigger);
    j["type"] = "after_count";
    j["parent"] = c.parent;
    j["count"] = c.count;
  }
  return j;
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

void Scenario::validate() const {
  try {
    circuit.validate();
  } catch (const InvalidParameter& e) {
    throw ScenarioError("circuit", e.what());
  }
  try {
    harvester.validate();
  } catch (const InvalidParameter& e) {
    throw ScenarioError("harvester", e.what());
  }
  if (!(horizon > 0.0)) throw ScenarioError("horizon_s", "horizon must be positive");
  if (!(dt > 0.0)) throw ScenarioError("dt_s", "dt must be positive");
  if (!(v_turn_on > circuit.v_min && v_turn_on <= circuit.v_max))
    throw ScenarioError("v_turn_on", "turn-on threshold must lie in (v_min, v_max]");
  try {
    (void)expand(templates, horizon);
  } catch (const std::exception& e) {
    throw ScenarioError("tasks", e.what());
  }
}

Scenario load_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(line_column(text, e.byte > 0 ? e.byte - 1 : 0), "malformed JSON");
  }

  const Reader r(root, "");
  Scenario s;
  s.name = r.has("name") ? r.string("name") : std::string{};
  s.horizon = r.number("horizon_s");
  s.dt = r.number("dt_s");
  s.v_turn_on = r.number_or("v_turn_on", s.v_turn_on);

  const Reader c(r.child("circuit"), "circuit");
  s.circuit.capacitance_farads = c.number("capacitance_f");
  s.circuit.v_min = c.number("v_min");
  s.circuit.v_max = c.number("v_max");
  s.circuit.v_init = c.number("v_init");
  s.circuit.operating_voltage = c.number("operating_voltage");
  s.circuit.sleep_current_amps = c.number("sleep_current_a");
  s.circuit.turn_on_current_amps = c.number("turn_on_current_a");
  s.circuit.turn_on_time_seconds = c.number("turn_on_time_s");

  const Reader h(r.child("harvester"), "harvester");
  const json& segments = h.child("segments");
  if (!segments.is_array()) throw ScenarioError("harvester.segments", "expected an array of [time_s, watts]");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const json& seg = segments[i];
    if (!seg.is_array() || seg.size() != 2 || !seg[0].is_number() || !seg[1].is_number())
      throw ScenarioError("harvester.segments[" + std::to_string(i) + "]", "expected [time_s, watts]");
    s.harvester.segments.push_back({seg[0].get<double>(), seg[1].get<double>()});
  }
  s.harvester.horizon = s.horizon;

  const json& tasks = r.child("tasks");
  if (!tasks.is_array()) throw ScenarioError("tasks", "expected an array");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string path = "tasks[" + std::to_string(i) + "]";
    const Reader t(tasks[i], path);
    TaskTemplate tpl;
    tpl.name = t.string("name");
    tpl.priority = t.number("priority");
    tpl.exec_time = t.number("exec_time_s");
    tpl.current = t.number("current_a");
    tpl.rel_deadline = t.number("rel_deadline_s");
    tpl.trigger = parse_trigger(t.child("trigger"), path + ".trigger");
    s.templates.push_back(std::move(tpl));
  }

  s.validate();
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string(), "scenario not found");
  std::ostringstream text;
  text << in.rdbuf();
  return load_scenario(text.str());
}

std::string save_scenario(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["horizon_s"] = s.horizon;
  j["dt_s"] = s.dt;
  j["v_turn_on"] = s.v_turn_on;
  ordered_json c;
  c["capacitance_f"] = s.circuit.capacitance_farads;
  c["v_min"] = s.circuit.v_min;
  c["v_max"] = s.circuit.v_max;
  c["v_init"] = s.circuit.v_init;
  c["operating_voltage"] = s.circuit.operating_voltage;
  c["sleep_current_a"] = s.circuit.sleep_current_amps;
  c["turn_on_current_a"] = s.circuit.turn_on_current_amps;
  c["turn_on_time_s"] = s.circuit.turn_on_time_seconds;
  j["circuit"] = c;
  ordered_json segments = ordered_json::array();
  for (const auto& seg : s.harvester.segments) segments.push_back({seg.start_time, seg.power_watts});
  j["harvester"]["segments"] = segments;
  ordered_json tasks = ordered_json::array();
  for (const auto& t : s.templates) {
    ordered_json task;
    task["name"] = t.name;
    task["priority"] = t.priority;
    task["exec_time_s"] = t.exec_time;
    task["current_a"] = t.current;
    task["rel_deadline_s"] = t.rel_deadline;
    task["trigger"] = trigger_json(t.trigger);
    tasks.push_back(task);
  }
  j["tasks"] = tasks;
  return j.dump(2) + "\n";
}

Scenario with_constant_harvest(Scenario scenario, double power_watts) {
  scenario.harvester = HarvesterProfile::constant(power_watts, scenario.horizon);
  return scenario;
}

PreparedScenario prepare(const Scenario& scenario) {
  PreparedScenario p;
  p.scenario = scenario;
  p.scenario.harvester.horizon = scenario.horizon;
  p.instances = expand(scenario.templates, scenario.horizon);
  p.grid = to_grid(p.instances, scenario.dt, scenario.horizon);
  return p;
}

}  // namespace ehsched
