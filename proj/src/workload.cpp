#include "ehsched/workload.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "ehsched/errors.hpp"

namespace ehsched {

namespace {

constexpr double kGridTolerance = 1e-9;

const std::string* parent_of(const Trigger& trigger) {
  if (const auto* p = std::get_if<AfterParent>(&trigger)) return &p->parent;
  if (const auto* c = std::get_if<AfterCount>(&trigger)) return &c->parent;
  return nullptr;
}

void check_template(const TaskTemplate& t) {
  auto fail = [&](const std::string& what) { throw ValidationError("template '" + t.name + "': " + what); };
  if (t.name.empty()) throw ValidationError("template with empty name");
  if (!(t.exec_time > 0.0)) fail("exec_time must be positive");
  if (!(t.rel_deadline >= 0.0)) fail("rel_deadline must be non-negative");
  if (!(t.priority > 0.0)) fail("priority must be positive");
  if (!(t.current > 0.0)) fail("current must be positive");
  if (const auto* p = std::get_if<Periodic>(&t.trigger)) {
    if (!(p->period > 0.0)) fail("period must be positive");
    if (!(p->first_arrival >= 0.0)) fail("first arrival must be non-negative");
  }
  if (const auto* c = std::get_if<AfterCount>(&t.trigger); c && c->count < 1) fail("count must be at least 1");
}

// Kahn's algorithm over the template parent graph, ties by declaration order.
std::vector<std::size_t> template_order(std::span<const TaskTemplate> templates) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    if (!index.emplace(templates[i].name, i).second)
      throw ValidationError("duplicate template name '" + templates[i].name + "'");
  }
  std::vector<std::vector<std::size_t>> children(templates.size());
  std::vector<int> indegree(templates.size(), 0);
  for (std::size_t i = 0; i < templates.size(); ++i) {
    if (const auto* parent = parent_of(templates[i].trigger)) {
      auto it = index.find(*parent);
      if (it == index.end())
        throw ValidationError("template '" + templates[i].name + "' references unknown parent '" + *parent + "'");
      children[it->second].push_back(i);
      ++indegree[i];
    }
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < templates.size(); ++i)
    if (indegree[i] == 0) ready.insert(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t c : children[i])
      if (--indegree[c] == 0) ready.insert(c);
  }
  if (order.size() != templates.size()) throw ValidationError("cyclic template graph");
  return order;
}

struct Proto {
  std::size_t template_index;
  std::size_t occurrence;
  double arrival;
  double latest_ready;  // latest time every parent can have finished
  std::vector<std::pair<std::size_t, std::size_t>> parents;  // (template, occurrence)
};

}  // namespace

int slots_ceil(double seconds, double dt) {
  return static_cast<int>(std::ceil(seconds / dt - kGridTolerance));
}

int slots_floor(double seconds, double dt) {
  return static_cast<int>(std::floor(seconds / dt + kGridTolerance));
}

std::vector<TaskInstance> expand(std::span<const TaskTemplate> templates, double horizon) {
  if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");
  for (const auto& t : templates) check_template(t);
  const auto order = template_order(templates);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < templates.size(); ++i) index.emplace(templates[i].name, i);

  std::vector<std::vector<Proto>> generated(templates.size());
  for (std::size_t ti : order) {
    const TaskTemplate& t = templates[ti];
    auto& out = generated[ti];
    if (const auto* p = std::get_if<Periodic>(&t.trigger)) {
      for (std::size_t k = 0;; ++k) {
        const double arrival = p->first_arrival + static_cast<double>(k) * p->period;
        if (arrival >= horizon - kGridTolerance * std::max(1.0, horizon)) break;
        out.push_back({ti, k, arrival, arrival, {}});
      }
      continue;
    }
    const std::size_t pi = index.at(*parent_of(t.trigger));
    const auto& parents = generated[pi];
    const double parent_exec = templates[pi].exec_time;
    const std::size_t group = std::holds_alternative<AfterCount>(t.trigger)
                                  ? static_cast<std::size_t>(std::get<AfterCount>(t.trigger).count)
                                  : 1;
    for (std::size_t g = 0; g + group <= parents.size(); g += group) {
      Proto proto{ti, g / group, 0.0, 0.0, {}};
      const double parent_deadline = templates[pi].rel_deadline;
      for (std::size_t k = g; k < g + group; ++k) {
        proto.arrival = std::max(proto.arrival, parents[k].arrival + parent_exec);
        proto.latest_ready = std::max(proto.latest_ready, parents[k].latest_ready + parent_deadline + parent_exec);
        proto.parents.emplace_back(pi, k);
      }
      out.push_back(std::move(proto));
    }
  }

  std::vector<const Proto*> all;
  for (const auto& v : generated)
    for (const auto& p : v) all.push_back(&p);
  std::stable_sort(all.begin(), all.end(), [](const Proto* a, const Proto* b) {
    return std::tie(a->arrival, a->template_index, a->occurrence) <
           std::tie(b->arrival, b->template_index, b->occurrence);
  });

  std::map<std::pair<std::size_t, std::size_t>, int> ids;
  for (std::size_t i = 0; i < all.size(); ++i)
    ids[{all[i]->template_index, all[i]->occurrence}] = static_cast<int>(i);

  std::vector<TaskInstance> instances;
  instances.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Proto& p = *all[i];
    const TaskTemplate& t = templates[p.template_index];
    TaskInstance inst;
    inst.id = static_cast<int>(i);
    inst.template_name = t.name;
    inst.priority = t.priority;
    inst.exec_time = t.exec_time;
    inst.current = t.current;
    inst.arrival = p.arrival;
    inst.start_deadline = p.latest_ready + t.rel_deadline;
    for (const auto& key : p.parents) inst.parents.push_back(ids.at(key));
    std::sort(inst.parents.begin(), inst.parents.end());
    instances.push_back(std::move(inst));
  }
  return instances;
}

Grid to_grid(std::span<const TaskInstance> instances, double dt, double horizon) {
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");
  Grid grid;
  grid.dt = dt;
  int longest = 1;
  double shortest_exec = std::numeric_limits<double>::infinity();
  for (const auto& inst : instances) {
    GriddedInstance g;
    g.instance = inst;
    g.arrival_slot = std::max(0, slots_ceil(inst.arrival, dt));
    g.latest_start_slot = slots_floor(inst.start_deadline, dt);
    g.duration_slots = std::max(1, slots_ceil(inst.exec_time, dt));
    longest = std::max(longest, g.duration_slots);
    shortest_exec = std::min(shortest_exec, inst.exec_time);
    grid.instances.push_back(std::move(g));
  }
  grid.slot_count = slots_ceil(horizon, dt) + longest;
  for (auto& g : grid.instances) {
    const int last_fitting = grid.slot_count - g.duration_slots;
    g.schedulable = g.arrival_slot <= g.latest_start_slot && g.arrival_slot <= last_fitting;
    if (g.arrival_slot > g.latest_start_slot) {
      std::ostringstream msg;
      msg << "instance " << g.instance.id << " (" << g.instance.template_name
          << "): start window is empty on the grid";
      grid.warnings.push_back(msg.str());
    }
  }
  if (!instances.empty() && dt > shortest_exec * (1.0 + kGridTolerance)) {
    std::ostringstream msg;
    msg << "dt " << dt << " exceeds the shortest execution time " << shortest_exec
        << "; durations round up to whole slots";
    grid.warnings.push_back(msg.str());
  }
  return grid;
}

ValidationReport validate(std::span<const TaskInstance> instances) {
  ValidationReport report;
  std::map<int, const TaskInstance*> by_id;
  for (const auto& inst : instances) {
    if (!by_id.emplace(inst.id, &inst).second) report.findings.push_back({inst.id, "duplicate id"});
    if (inst.start_deadline < inst.arrival) report.findings.push_back({inst.id, "empty start window"});
  }
  for (const auto& inst : instances)
    for (int p : inst.parents)
      if (!by_id.contains(p)) report.findings.push_back({inst.id, "dangling parent"});

  // 0 = unvisited, 1 = on the current path, 2 = done. A back edge marks the
  // whole path segment it closes.
  std::map<int, int> colour;
  std::set<int> cyclic;
  std::vector<int> path;
  std::function<void(int)> visit = [&](int id) {
    colour[id] = 1;
    path.push_back(id);
    for (int p : by_id.at(id)->parents) {
      if (!by_id.contains(p)) continue;
      if (colour[p] == 1) {
        cyclic.insert(std::find(path.begin(), path.end(), p), path.end());
      } else if (colour[p] == 0) {
        visit(p);
      }
    }
    path.pop_back();
    colour[id] = 2;
  };
  for (const auto& [id, _] : by_id)
    if (colour[id] == 0) visit(id);
  for (int id : cyclic) report.findings.push_back({id, "cycle"});
  return report;
}

}  // namespace ehsched
