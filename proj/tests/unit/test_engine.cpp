#include <algorithm>
#include <random>

#include "doctest.h"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "hsgd/engine.hpp"
#include "metric_oracle.hpp"
#include "random_model.hpp"

using namespace hsgd;
using fixtures::scenario;
using testing::code_of;

namespace {

std::vector<const Event*> events_of(const Trajectory& tr, EventKind kind, Tick tick = -1) {
  std::vector<const Event*> out;
  for (const auto& e : tr.events) {
    if (e.kind == kind && (tick < 0 || e.tick == tick)) out.push_back(&e);
  }
  return out;
}

Count occupancy(const Trajectory& tr, const DiagramId& d, const StateId& s, Tick t) {
  return tr.diagrams.at(d).dynamics.occupancy.at(s)[static_cast<std::size_t>(t)];
}

Trajectory demo3_full_run() {
  return run(fixtures::demo3_model(), scenario("full", {{0, {"x01"}}, {2, {"x12"}}}, 4));
}

}  // namespace

TEST_CASE("step on the parent-child fixture drives the parent by quorum") {
  const auto model = fixtures::parent_child().assemble();
  auto st = initial_state(model, 8);
  auto r0 = step(model, st, 0, {"x_c1", "x_c2"});
  CHECK(r0.snapshot.at("C1").at("S0") == 1);
  CHECK(r0.in_transit.at("C1") == 0);
  auto r1 = step(model, r0.state, 1, {});
  CHECK(r1.snapshot.at("C1").at("S1") == 1);
  CHECK(r1.snapshot.at("C2").at("S1") == 1);
  const auto up = std::find_if(r1.events.begin(), r1.events.end(), [](const Event& e) {
    return e.kind == EventKind::upward;
  });
  REQUIRE(up != r1.events.end());
  CHECK(up->arc == "p01");
  CHECK(up->objects.size() == 1);
  CHECK(up->arrival == 3);
  auto r2 = step(model, r1.state, 2, {});
  CHECK(r2.in_transit.at("P") == 1);
  auto r3 = step(model, r2.state, 3, {});
  CHECK(r3.snapshot.at("P").at("P1") == 1);
}

TEST_CASE("step with no symbols and no dwell limits changes nothing") {
  const auto model = fixtures::demo3_model();
  const auto st = initial_state(model, 4);
  const auto r = step(model, st, 0, {});
  CHECK(r.events.empty());
  CHECK(r.state.objects == st.objects);
  CHECK(r.state.tick == 1);
}

TEST_CASE("general symbol co-occurring with child completions is redundant") {
  const auto model = fixtures::parent_child().assemble();
  const auto tr = run(model, scenario("g", {{0, {"g", "x_c1"}}}, 8));
  CHECK(tr.stats.redundancy >= 1);
  REQUIRE(events_of(tr, EventKind::suppressed).size() == 1);
  CHECK(events_of(tr, EventKind::suppressed)[0]->tick == 1);
  CHECK(events_of(tr, EventKind::upward).empty());
  // g's cascade already moved C1's object, so x_c1 is vacuous.
  const auto ind = events_of(tr, EventKind::individual, 0);
  REQUIRE(ind.size() == 1);
  CHECK(ind[0]->objects.empty());
}

TEST_CASE("step rejects unknown symbols and inconsistent states") {
  const auto model = fixtures::demo3_model();
  auto st = initial_state(model, 4);
  CHECK(code_of([&] { step(model, st, 0, {"nope"}); }) == ErrorCode::unknown_symbol);
  CHECK(code_of([&] { step(model, st, 2, {}); }) == ErrorCode::inconsistent_state);
  st.objects.at("demo3").pop_back();
  CHECK(code_of([&] { step(model, st, 0, {}); }) == ErrorCode::inconsistent_state);
}

TEST_CASE("run demo3 with x01 then x12") {
  const auto tr = demo3_full_run();
  CHECK(occupancy(tr, "demo3", "S1", 1) == 4);
  CHECK(occupancy(tr, "demo3", "S2", 2) == 0);
  CHECK(occupancy(tr, "demo3", "S2", 3) == 4);
  CHECK(tr.diagrams.at("demo3").dynamics.eta.at("a01").back() == 4);
  CHECK(tr.diagrams.at("demo3").dynamics.eta.at("a12").back() == 4);
  CHECK(evaluate(tr, scenario("full", {{0, {"x01"}}, {2, {"x12"}}}, 4)).goal_times.at("demo3") == Tick{3});
  CHECK(check_dynamics(tr.diagrams.at("demo3").dynamics).ok());
}

TEST_CASE("empty ϑ equals the inertial run") {
  const auto model = fixtures::demo3_model();
  auto a = run(model, scenario("inertial", {}, 4));
  auto b = run_inertial(model, 4);
  CHECK(a == b);
}

TEST_CASE("vacuous symbol application is logged") {
  const auto tr = run(fixtures::demo3_model(), scenario("v", {{0, {"x12"}}}, 4));
  const auto ind = events_of(tr, EventKind::individual);
  REQUIRE(ind.size() == 1);
  CHECK(ind[0]->symbol == "x12");
  CHECK(ind[0]->objects.empty());
  CHECK(events_of(tr, EventKind::arrival).empty());
  CHECK(tr.stats.resource == 3.0);
}

TEST_CASE("run_inertial") {
  SUBCASE("demo3 holds μ0") {
    const auto tr = run_inertial(fixtures::demo3_model(), 4);
    for (Tick t = 0; t <= 4; ++t) CHECK(occupancy(tr, "demo3", "S0", t) == 4);
    CHECK(tr.events.empty());
  }
  SUBCASE("dwell limit sends S1 back to S0") {
    auto d = fixtures::demo3();
    d.mu[0] = Distribution{{"S1", 1.0}};
    d.states[1].dwell_limit = 2;
    const auto tr = run_inertial(fixtures::demo3_model(d), 4);
    const auto back = events_of(tr, EventKind::backstep);
    REQUIRE(back.size() == 1);
    CHECK(back[0]->tick == 2);
    CHECK(back[0]->objects.size() == 4);
    CHECK(tr.diagrams.at("demo3").dynamics.eta.at("b10").back() == 4);
    CHECK(occupancy(tr, "demo3", "S1", 2) == 4);
    CHECK(occupancy(tr, "demo3", "S0", 3) == 4);
    CHECK(tr.diagrams.at("demo3").dynamics.eta.at("a01").back() == 0);
  }
  SUBCASE("parent-child fixture never propagates upward") {
    const auto tr = run_inertial(fixtures::parent_child().assemble(), 8);
    CHECK(events_of(tr, EventKind::upward).empty());
    CHECK(tr.events.empty());
  }
}

TEST_CASE("guards strip backsteps into the guarded state") {
  auto d = fixtures::demo3();
  d.mu[0] = Distribution{{"S1", 1.0}};
  d.states[1].dwell_limit = 1;
  auto s = scenario("guarded", {}, 4);
  s.guards.push_back(BackstepGuard{StateRef{"demo3", "S0"}, 0, 4});
  const auto tr = run(fixtures::demo3_model(d), s);
  CHECK(events_of(tr, EventKind::backstep).empty());
}

TEST_CASE("run rejects invalid scenarios") {
  const auto model = fixtures::demo3_model();
  CHECK(code_of([&] { run(model, scenario("s", {{0, {"zz"}}}, 4)); }) == ErrorCode::unknown_symbol);
  CHECK(code_of([&] { run(model, scenario("s", {{5, {"x01"}}}, 4)); }) == ErrorCode::precondition_violated);
  CHECK(code_of([&] { run(model, scenario("s", {}, 9)); }) == ErrorCode::precondition_violated);
}

TEST_CASE("evaluate") {
  SUBCASE("demo3 full run") {
    const auto r = evaluate(demo3_full_run(), scenario("full", {{0, {"x01"}}, {2, {"x12"}}}, 4));
    CHECK(r.complete);
    CHECK(r.redundancy_count == 0);
    CHECK(r.omitted_ratio == 0.0);
    CHECK(r.complexness == 0.0);
    CHECK(r.resource_total == 5.0);
    CHECK(r.divergence.at("demo3").at(0) == 0.0);
  }
  SUBCASE("parent-child general-symbol run") {
    const auto model = fixtures::parent_child().assemble();
    const auto s = scenario("g", {{0, {"g"}}}, 8);
    const auto r = evaluate(run(model, s), s);
    CHECK(r.complete);
    CHECK(r.complexness == 1.0);
    CHECK(r.goal_times.at("P") == Tick{2});
  }
  SUBCASE("horizon 0") {
    const auto s = scenario("empty", {}, 0);
    const auto r = evaluate(run(fixtures::demo3_model(), s), s);
    CHECK_FALSE(r.complete);
    CHECK(r.omitted_ratio == 0.0);
    CHECK(r.complexness == 0.0);
    CHECK(r.redundancy_count == 0);
  }
  SUBCASE("single-state diagram is complete at once") {
    const auto s = scenario("one", {}, 0);
    CHECK(evaluate(run(assemble({fixtures::single_state(3)}, {}, {}, {}, {}), s), s).complete);
  }
  SUBCASE("mismatched trajectory") {
    const auto tr = demo3_full_run();
    CHECK(code_of([&] { evaluate(tr, scenario("other", {}, 4)); }) == ErrorCode::trajectory_model_mismatch);
    auto s = scenario("full", {}, 4);
    s.model = "different";
    CHECK(code_of([&] { evaluate(tr, s); }) == ErrorCode::trajectory_model_mismatch);
  }
  SUBCASE("omitted possibilities") {
    auto d = fixtures::demo3();
    d.states[1].dwell_limit = 1;
    const auto s = scenario("omit", {{0, {"x01"}}}, 4);
    const auto r = evaluate(run(fixtures::demo3_model(d), s), s);
    // 4 forward completions into S1, then 4 backsteps out of the reached S1.
    CHECK(r.omitted_ratio == 0.5);
  }
}

TEST_CASE("efficiency_vectors") {
  SUBCASE("rank progress") {
    const auto v = efficiency_vectors(demo3_full_run(), CriterionConfig{1.0, 0.0, 0.0});
    CHECK(v.w.at("demo3") == std::vector<double>{0.0, 0.5, 0.5, 1.0, 1.0});
    CHECK(v.s.at("demo3") == std::vector<StateId>{"S0", "S1", "S1", "S2", "S2"});
    CHECK(v.u.at("demo3")[0] == SymbolSet{"x01"});
    CHECK(v.u.at("demo3")[1].empty());
  }
  SUBCASE("empty run") {
    const auto v = efficiency_vectors(run_inertial(fixtures::demo3_model(), 4), CriterionConfig{});
    CHECK(v.w.at("demo3") == std::vector<double>(5, 0.0));
  }
  SUBCASE("cost accumulation") {
    const auto v = efficiency_vectors(demo3_full_run(), CriterionConfig{0.0, 1.0, 0.0});
    CHECK(v.w.at("demo3").back() == -5.0);
    CHECK(v.w.at("demo3")[1] == -2.0);
  }
  SUBCASE("modal state held during transit") {
    auto d = fixtures::demo3();
    d.arcs[1].transit = 2;
    const auto tr = run(fixtures::demo3_model(d), scenario("t", {{0, {"x01"}}, {1, {"x12"}}}, 4));
    const auto v = efficiency_vectors(tr, CriterionConfig{});
    CHECK(v.s.at("demo3") == std::vector<StateId>{"S0", "S1", "S1", "S2", "S2"});
  }
}

TEST_CASE("check_partial") {
  const auto tr = demo3_full_run();
  CHECK(check_partial(tr, PartialCriterion{{{{"", "S1"}, 2}, {{"", "S2"}, 4}}, {}, {}}).confirmed);
  const auto v = check_partial(tr, PartialCriterion{{{{"", "S2"}, 2}}, {}, {}});
  CHECK_FALSE(v.confirmed);
  CHECK(v.failed == "S2");
  CHECK(check_partial(tr, PartialCriterion{}).confirmed);
  CHECK_FALSE(check_partial(tr, PartialCriterion{{}, 4.0, {}}).confirmed);
  CHECK_FALSE(check_partial(tr, PartialCriterion{{{{"demo3", "S2"}, 4}}, {}, Tick{2}}).confirmed);
  CHECK(code_of([&] { check_partial(tr, PartialCriterion{{{{"", "S9"}, 2}}, {}, {}}); }) ==
        ErrorCode::unknown_support_state);
}

namespace {

ScenarioReport report(std::string id, bool complete, double resource, Tick goal) {
  ScenarioReport r;
  r.scenario = std::move(id);
  r.complete = complete;
  r.resource_total = resource;
  r.goal_times["d"] = goal;
  return r;
}

}  // namespace

TEST_CASE("compare") {
  SUBCASE("mutually non-dominated reports share the frontier") {
    const std::vector<ScenarioReport> rs{report("a", true, 5, 3), report("b", true, 6, 2)};
    const auto ranking = compare(rs);
    REQUIRE(ranking.size() == 2);
    CHECK(ranking[0].layer == 0);
    CHECK(ranking[1].layer == 0);
    CHECK(ranking[0].scenario == "b");  // lower goal time first
  }
  SUBCASE("completeness first") {
    const std::vector<ScenarioReport> rs{report("x", false, 1, 1), report("y", true, 5, 3)};
    CHECK(compare(rs)[0].scenario == "y");
  }
  SUBCASE("id tie-break") {
    const std::vector<ScenarioReport> rs{report("b", true, 1, 1), report("a", true, 1, 1)};
    const auto ranking = compare(rs);
    CHECK(ranking[0].scenario == "a");
    CHECK(ranking[1].scenario == "b");
  }
  SUBCASE("dominated reports fall to later layers") {
    const std::vector<ScenarioReport> rs{report("a", true, 5, 3), report("b", true, 6, 4)};
    CHECK(compare(rs)[1] == RankedReport{"b", 1});
  }
  SUBCASE("model mismatch") {
    std::vector<ScenarioReport> rs{report("a", true, 5, 3), report("b", true, 6, 4)};
    rs[1].model = "other";
    CHECK(code_of([&] { compare(rs); }) == ErrorCode::model_mismatch);
  }
}

TEST_CASE("property: scaling criterion weights leaves the ranking unchanged") {
  std::mt19937_64 rng(5);
  const auto model = fixtures::demo3_model();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ControlScenario> scenarios;
    for (int k = 0; k < 4; ++k) {
      auto s = testing::random_scenario(rng, model, 4);
      s.id = "s" + std::to_string(k);
      s.criterion = CriterionConfig{1.0, 0.5, 0.25};
      scenarios.push_back(s);
    }
    std::vector<ScenarioReport> base;
    std::vector<ScenarioReport> scaled;
    for (auto s : scenarios) {
      base.push_back(evaluate(run(model, s), s));
      s.criterion = CriterionConfig{3.0, 1.5, 0.75};
      scaled.push_back(evaluate(run(model, s), s));
    }
    CHECK(compare(base) == compare(scaled));
  }
}

TEST_CASE("property: random hierarchical runs") {
  std::mt19937_64 rng(424242);
  int multi_level = 0;
  int with_upward = 0;
  int with_redundancy = 0;
  int with_omitted = 0;
  int complete = 0;
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    const auto model = testing::random_model(rng);
    const auto s = testing::random_scenario(rng, model);
    const auto tr = run(model, s);

    // Determinism.
    CHECK(run(model, s).events == tr.events);
    // Conservation and counter monotonicity.
    for (const auto& [id, trace] : tr.diagrams) {
      const auto r = check_dynamics(trace.dynamics);
      CHECK_MESSAGE(r.ok(), format_report(r));
    }
    // Replay soundness.
    const auto rebuilt = replay(tr);
    for (const auto& [id, trace] : tr.diagrams) CHECK(rebuilt.at(id) == trace.dynamics);
    // Metric oracle.
    const auto rep = evaluate(tr, s);
    const auto oracle = testing::recount(tr, model);
    CHECK(rep.complete == oracle.complete);
    CHECK(rep.redundancy_count == oracle.redundancy);
    CHECK(rep.omitted_ratio == oracle.omitted_ratio);
    CHECK(rep.complexness == oracle.complexness);
    CHECK(rep.resource_total == oracle.resource);
    multi_level += model.levels > 1;
    with_upward += !events_of(tr, EventKind::upward).empty();
    with_redundancy += rep.redundancy_count > 0;
    with_omitted += rep.omitted_ratio > 0.0;
    complete += rep.complete;
    // Inertial zero-forward.
    const auto inertial = run_inertial(model, s.horizon);
    for (const auto& [id, trace] : inertial.diagrams) {
      for (const auto& a : trace.arcs) {
        if (a.kind == ArcKind::forward) CHECK(trace.dynamics.eta.at(a.id).back() == 0);
      }
    }
  }
  MESSAGE("multi-level ", multi_level, ", upward ", with_upward, ", redundant ", with_redundancy, ", omitted ",
          with_omitted, ", complete ", complete);
  CHECK(multi_level > 0);
  CHECK(with_upward > 0);
  CHECK(with_redundancy > 0);
  CHECK(with_omitted > 0);
  CHECK(complete > 0);
}

TEST_CASE("property: modal rank is nondecreasing for a single cohort without dwell limits") {
  std::mt19937_64 rng(8);
  testing::ModelShape shape;
  shape.diagram.dwell_limits = false;
  shape.diagram.spread_initial = false;
  for (int trial = 0; trial < 100; ++trial) {
    const auto model = testing::random_model(rng, shape);
    const auto tr = run(model, testing::random_scenario(rng, model));
    const auto v = efficiency_vectors(tr, CriterionConfig{});
    for (const auto& [id, w] : v.w) {
      CAPTURE(id);
      CHECK(std::is_sorted(w.begin(), w.end()));
    }
  }
}
