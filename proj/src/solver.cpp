// Exact solver for the time-indexed program.
//
// Because V_t is fully determined by which task (if any) occupies each slot,
// the search runs forward in time over partial schedules ("labels"). A label
// sits at the first slot where the device is free and records the objective,
// the voltage entering that slot and the start slot of every instance decided
// so far. From there it either sleeps one slot or starts an eligible instance.
//
// Two labels at the same slot with the same status of all still-relevant
// instances (done / dead for every instance whose start window is not yet
// closed) have identical futures, except that a higher voltage can do
// everything a lower one can (the step map is increasing in V). So a label is
// dropped when another one has at least its voltage and a strictly better
// objective, or an equal objective and a lexicographically smaller start
// vector. This keeps exactly one optimal schedule under the tie-break rule.
// Labels whose objective plus all still-attainable priority cannot reach the
// best completed objective are pruned as well.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <unordered_map>

#include "ehsched/errors.hpp"
#include "ehsched/scheduler.hpp"

namespace ehsched {

namespace {

using Bits = std::vector<std::uint64_t>;

struct Label {
  double objective = 0.0;
  double voltage = 0.0;
  double attainable = 0.0;  // objective plus priority of still-open, live instances
  std::vector<int> starts;  // per local instance; kNotScheduled if not run
};

struct KeyHash {
  std::size_t operator()(const Bits& bits) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::uint64_t w : bits) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

using Front = std::vector<Label>;
using Bucket = std::unordered_map<Bits, Front, KeyHash>;

// -1: a precedes b, 0: equal, 1: b precedes a.
int compare_labels(const Label& a, const Label& b) {
  if (!objective_equal(a.objective, b.objective)) return a.objective > b.objective ? -1 : 1;
  if (a.starts < b.starts) return -1;
  if (b.starts < a.starts) return 1;
  return 0;
}

bool dominates(const Label& a, const Label& b) {
  return a.voltage >= b.voltage && compare_labels(a, b) <= 0;
}

void insert(Front& front, Label label) {
  for (const Label& existing : front)
    if (dominates(existing, label)) return;
  std::erase_if(front, [&](const Label& existing) { return dominates(label, existing); });
  front.push_back(std::move(label));
}

class Search {
public:
  Search(const TimeIndexedProgram& program, const SolveOptions& options)
      : program_(program),
        n_(program.instances.size()),
        words_((n_ + 63) / 64),
        deadline_(std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(options.time_limit_seconds))) {
  }

  Schedule run() {
    const int begin = program_.begin_slot;
    const int end = program_.end_slot;
    buckets_.assign(static_cast<std::size_t>(end - begin + 1), Bucket{});

    Label root;
    root.voltage = program_.v_init;
    root.starts.assign(n_, kNotScheduled);
    place(begin, std::move(root));

    for (int t = begin; t < end; ++t) {
      if (std::chrono::steady_clock::now() > deadline_) return time_limited(t);
      Bucket bucket = std::move(buckets_[static_cast<std::size_t>(t - begin)]);
      buckets_[static_cast<std::size_t>(t - begin)] = Bucket{};
      for (auto& [key, front] : bucket) {
        for (Label& label : front) expand(t, std::move(label));
      }
    }

    Bucket& last = buckets_.back();
    const Label* best = nullptr;
    for (const auto& [key, front] : last)
      for (const Label& label : front)
        if (best == nullptr || compare_labels(label, *best) < 0) best = &label;
    Schedule schedule = to_schedule(*best);
    schedule.upper_bound = schedule.objective;
    return schedule;
  }

private:
  bool hopeless(const Label& label) const {
    return label.attainable < incumbent_ && !objective_equal(label.attainable, incumbent_);
  }

  bool closed(std::size_t j, int t) const { return program_.instances[j].last_start < t; }

  // Status key of a label entering slot t, plus the priority still attainable.
  Bits key_for(int t, const Label& label, double* attainable) const {
    Bits key(2 * words_, 0);
    std::vector<char> dead(n_, 0);
    double remaining = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (closed(j, t)) continue;
      const bool done = label.starts[j] != kNotScheduled;
      for (int p : program_.instances[j].parents) {
        const auto pi = static_cast<std::size_t>(p);
        if (dead[pi] || (closed(pi, t) && label.starts[pi] == kNotScheduled)) {
          dead[j] = 1;
          break;
        }
      }
      if (done) key[j / 64] |= 1ULL << (j % 64);
      if (dead[j]) key[words_ + j / 64] |= 1ULL << (j % 64);
      if (!done && !dead[j]) remaining += program_.instances[j].priority;
    }
    if (attainable) *attainable = label.objective + remaining;
    return key;
  }

  void place(int t, Label label) {
    Bits key = key_for(t, label, &label.attainable);
    if (hopeless(label)) return;
    // A label that sleeps to the end is always feasible, so its objective is a valid incumbent.
    incumbent_ = std::max(incumbent_, label.objective);
    insert(buckets_[static_cast<std::size_t>(t - program_.begin_slot)][std::move(key)], std::move(label));
  }

  void expand(int t, Label label) {
    if (hopeless(label)) return;

    const auto rel = static_cast<std::size_t>(t - program_.begin_slot);
    const double v_min = program_.circuit.v_min;
    const double v_max = program_.circuit.v_max;
    if (label.voltage >= v_min) {
      for (std::size_t j = 0; j < n_; ++j) {
        const ProgramInstance& inst = program_.instances[j];
        if (label.starts[j] != kNotScheduled || t < inst.first_start || t > inst.last_start) continue;
        const bool ready = std::all_of(inst.parents.begin(), inst.parents.end(), [&](int p) {
          return label.starts[static_cast<std::size_t>(p)] != kNotScheduled;
        });
        if (!ready) continue;
        const auto& maps = program_.step_maps[static_cast<std::size_t>(inst.load_class)];
        double v = label.voltage;
        bool feasible = true;
        for (int s = 0; s < inst.duration; ++s) {
          v = maps[rel + static_cast<std::size_t>(s)].apply(v);
          if (v < v_min || v > v_max) {
            feasible = false;
            break;
          }
        }
        if (!feasible) continue;
        Label next;
        next.objective = label.objective + inst.priority;
        next.voltage = v;
        next.starts = label.starts;
        next.starts[j] = t;
        place(t + inst.duration, std::move(next));
      }
    }
    label.voltage = program_.step_maps[0][rel].apply(label.voltage);
    place(t + 1, std::move(label));
  }

  Schedule to_schedule(const Label& label) const {
    Schedule schedule;
    for (std::size_t j = 0; j < n_; ++j)
      if (label.starts[j] != kNotScheduled) schedule.starts.emplace(program_.instances[j].id, label.starts[j]);
    // Sum in id order so equal sets give identical objectives.
    for (std::size_t j = 0; j < n_; ++j)
      if (label.starts[j] != kNotScheduled) schedule.objective += program_.instances[j].priority;
    schedule.voltage = voltage_trajectory(program_, schedule.starts);
    return schedule;
  }

  Schedule time_limited(int t) const {
    const Label* best = nullptr;
    double bound = 0.0;
    for (int s = t; s <= program_.end_slot; ++s) {
      for (const auto& [key, front] : buckets_[static_cast<std::size_t>(s - program_.begin_slot)]) {
        for (const Label& label : front) {
          bound = std::max(bound, label.attainable);
          if (best == nullptr || compare_labels(label, *best) < 0) best = &label;
        }
      }
    }
    Schedule schedule = best ? to_schedule(*best) : Schedule{};
    if (!best) schedule.voltage = voltage_trajectory(program_, {});
    schedule.optimality = Optimality::time_limited;
    schedule.upper_bound = std::max(bound, schedule.objective);
    schedule.gap = schedule.upper_bound > 0.0 ? (schedule.upper_bound - schedule.objective) / schedule.upper_bound : 0.0;
    return schedule;
  }

  const TimeIndexedProgram& program_;
  std::size_t n_;
  std::size_t words_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<Bucket> buckets_;
  double incumbent_ = 0.0;
};

}  // namespace

Schedule solve_from_state(const TimeIndexedProgram& program, const SolveOptions& options) {
  if (!(options.time_limit_seconds > 0.0)) throw InvalidParameter("time limit must be positive");
  if (program.end_slot <= program.begin_slot) {
    Schedule empty;
    return empty;
  }
  return Search(program, options).run();
}

Schedule solve_exact(const TimeIndexedProgram& program, const SolveOptions& options) {
  if (!(options.time_limit_seconds > 0.0)) throw InvalidParameter("time limit must be positive");
  if (program.v_init < program.circuit.v_min)
    throw InfeasibleProgram("initial voltage is below v_min");
  return solve_from_state(program, options);
}

}  // namespace ehsched
