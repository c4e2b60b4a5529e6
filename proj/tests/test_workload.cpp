#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>

#include "ehsched/errors.hpp"
#include "ehsched/workload.hpp"
#include "support.hpp"

using namespace ehsched;

namespace {

std::map<std::string, int> count_by_template(const std::vector<TaskInstance>& instances) {
  std::map<std::string, int> counts;
  for (const auto& i : instances) ++counts[i.template_name];
  return counts;
}

const TaskInstance& first_of(const std::vector<TaskInstance>& instances, const std::string& name) {
  return *std::find_if(instances.begin(), instances.end(), [&](const auto& i) { return i.template_name == name; });
}

}  // namespace

TEST_CASE("Smart Building expands to 41 instances") {
  const auto sc = testing::smart_building();
  const auto instances = expand(sc.templates, sc.horizon);
  CHECK(instances.size() == 41);
  const auto counts = count_by_template(instances);
  CHECK(counts.at("Sense") == 15);
  CHECK(counts.at("Compute") == 3);
  CHECK(counts.at("Tx") == 3);
  CHECK(counts.at("Request") == 7);
  CHECK(counts.at("Response") == 7);
  CHECK(counts.at("Receive") == 3);
  CHECK(counts.at("Actuate") == 3);
  const double priorities = std::accumulate(instances.begin(), instances.end(), 0.0,
                                            [](double s, const TaskInstance& i) { return s + i.priority; });
  // 15*1 + 3*3 + 3*3 + 7*8 + 7*10 + 3*8 + 3*8
  CHECK(priorities == 207.0);
}

TEST_CASE("ids are topological and dense") {
  const auto sc = testing::smart_building();
  const auto instances = expand(sc.templates, sc.horizon);
  for (std::size_t k = 0; k < instances.size(); ++k) {
    CHECK(instances[k].id == static_cast<int>(k));
    for (int p : instances[k].parents) CHECK(p < instances[k].id);
  }
  CHECK(validate(instances).ok());
}

TEST_CASE("chained instance timing") {
  const auto sc = testing::smart_building();
  const auto instances = expand(sc.templates, sc.horizon);
  const auto& request = first_of(instances, "Request");
  const auto& response = first_of(instances, "Response");
  CHECK(request.arrival == doctest::Approx(1.0));
  CHECK(request.start_deadline == doctest::Approx(1.2));
  REQUIRE(response.parents == std::vector<int>{request.id});
  // Ready once Request can have finished; latest start allows Request to start late.
  CHECK(response.arrival == doctest::Approx(1.21));
  CHECK(response.start_deadline == doctest::Approx(1.0 + 0.2 + 0.21 + 0.02));
}

TEST_CASE("after_count groups consecutive parents") {
  const auto sc = testing::smart_building();
  const auto instances = expand(sc.templates, sc.horizon);
  std::vector<int> senses;
  for (const auto& i : instances)
    if (i.template_name == "Sense") senses.push_back(i.id);
  int group = 0;
  for (const auto& i : instances) {
    if (i.template_name != "Compute") continue;
    const std::vector<int> expected(senses.begin() + 5 * group, senses.begin() + 5 * group + 5);
    CHECK(i.parents == expected);
    // 5th Sense of the group arrives at 5g + 4 s and runs 0.03 s.
    CHECK(i.arrival == doctest::Approx(5.0 * group + 4.03));
    ++group;
  }
  CHECK(group == 3);
}

TEST_CASE("partial after_count groups are not emitted") {
  std::vector<TaskTemplate> t{{"A", 1, 0.01, 1e-3, 0.1, Periodic{0.0, 1.0}},
                              {"B", 1, 0.01, 1e-3, 0.1, AfterCount{"A", 3}}};
  const auto instances = expand(t, 7.5);  // 8 A's -> 2 B's
  const auto counts = count_by_template(instances);
  CHECK(counts.at("A") == 8);
  CHECK(counts.at("B") == 2);
}

TEST_CASE("period longer than the horizon gives one instance") {
  std::vector<TaskTemplate> t{{"A", 1, 0.01, 1e-3, 0.1, Periodic{0.0, 20.0}}};
  CHECK(expand(t, 15.0).size() == 1);
  std::vector<TaskTemplate> late{{"A", 1, 0.01, 1e-3, 0.1, Periodic{15.0, 1.0}}};
  CHECK(expand(late, 15.0).empty());
}

TEST_CASE("template graph errors") {
  std::vector<TaskTemplate> cyc{{"A", 1, 0.01, 1e-3, 0.1, AfterParent{"B"}},
                                {"B", 1, 0.01, 1e-3, 0.1, AfterParent{"A"}}};
  CHECK_THROWS_WITH_AS(expand(cyc, 5.0), "cyclic template graph", ValidationError);
  std::vector<TaskTemplate> dangling{{"A", 1, 0.01, 1e-3, 0.1, AfterParent{"Z"}}};
  CHECK_THROWS_AS(expand(dangling, 5.0), ValidationError);
  std::vector<TaskTemplate> dup{{"A", 1, 0.01, 1e-3, 0.1, Periodic{}}, {"A", 1, 0.01, 1e-3, 0.1, Periodic{}}};
  CHECK_THROWS_AS(expand(dup, 5.0), ValidationError);
  std::vector<TaskTemplate> bad_exec{{"A", 1, 0.0, 1e-3, 0.1, Periodic{}}};
  CHECK_THROWS_AS(expand(bad_exec, 5.0), ValidationError);
  std::vector<TaskTemplate> bad_period{{"A", 1, 0.01, 1e-3, 0.1, Periodic{0.0, 0.0}}};
  CHECK_THROWS_AS(expand(bad_period, 5.0), ValidationError);
  std::vector<TaskTemplate> bad_count{{"A", 1, 0.01, 1e-3, 0.1, Periodic{}}, {"B", 1, 0.01, 1e-3, 0.1, AfterCount{"A", 0}}};
  CHECK_THROWS_AS(expand(bad_count, 5.0), ValidationError);
  CHECK_THROWS_AS(expand({}, 0.0), InvalidParameter);
}

TEST_CASE("instance validation findings") {
  std::vector<TaskInstance> bad(4);
  bad[0].id = 0;
  bad[1].id = 0;
  bad[2].id = 2;
  bad[2].parents = {9};
  bad[3].id = 3;
  bad[3].arrival = 1.0;
  bad[3].start_deadline = 0.5;
  const auto report = validate(bad);
  CHECK_FALSE(report.ok());
  CHECK(std::count(report.findings.begin(), report.findings.end(), Finding{0, "duplicate id"}) == 1);
  CHECK(std::count(report.findings.begin(), report.findings.end(), Finding{2, "dangling parent"}) == 1);
  CHECK(std::count(report.findings.begin(), report.findings.end(), Finding{3, "empty start window"}) == 1);

  std::vector<TaskInstance> cyc(2);
  cyc[0].id = 0;
  cyc[0].parents = {1};
  cyc[1].id = 1;
  cyc[1].parents = {0};
  const auto r2 = validate(cyc);
  CHECK(std::count_if(r2.findings.begin(), r2.findings.end(), [](const Finding& f) { return f.what == "cycle"; }) == 2);
}

TEST_CASE("grid arithmetic at 10 ms") {
  const auto sc = testing::smart_building();
  const auto instances = expand(sc.templates, sc.horizon);
  const Grid grid = to_grid(instances, 0.01, sc.horizon);
  CHECK(grid.slot_count >= 1519);
  CHECK(grid.slot_count == 1500 + 21);  // longest task runs 21 slots
  const auto& sense = grid.instances.front();
  REQUIRE(sense.instance.template_name == "Sense");
  CHECK(sense.arrival_slot == 0);
  CHECK(sense.latest_start_slot == 33);
  CHECK(sense.duration_slots == 3);
  for (const auto& g : grid.instances) {
    if (g.instance.template_name == "Tx") CHECK(g.duration_slots == 19);
    if (g.instance.template_name == "Request") CHECK(g.duration_slots == 21);
    CHECK(g.schedulable);
  }
  CHECK(grid.warnings.empty());
}

TEST_CASE("coarse grid rounds durations up and warns") {
  const auto sc = testing::smart_building();
  const auto instances = expand(sc.templates, sc.horizon);
  const Grid grid = to_grid(instances, 0.05, sc.horizon);
  for (const auto& g : grid.instances) {
    if (g.instance.template_name == "Compute") CHECK(g.duration_slots == 1);
    if (g.instance.template_name == "Tx") CHECK(g.duration_slots == 4);
  }
  CHECK_FALSE(grid.warnings.empty());
}

TEST_CASE("slot rounding tolerates representation error") {
  CHECK(slots_ceil(0.3, 0.1) == 3);
  CHECK(slots_floor(0.3, 0.1) == 3);
  CHECK(slots_ceil(0.21, 0.01) == 21);
  CHECK(slots_floor(1.0 / 3.0, 0.01) == 33);
  CHECK(slots_ceil(0.301, 0.1) == 4);
  CHECK(slots_floor(0.299, 0.1) == 2);
}
