#include <algorithm>
#include <random>

#include "doctest.h"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "hsgd/hierarchy.hpp"
#include "random_diagram.hpp"

using namespace hsgd;
using testing::code_of;

TEST_CASE("compose_sequential glues demo3 onto demo2") {
  const auto d = compose_sequential(fixtures::demo3(), fixtures::demo2());
  CHECK(d.partition.horizon() == 10);
  CHECK(d.partition.boundaries == std::vector<Tick>{0, 2, 4, 7, 10});
  CHECK(d.states.size() == 4);
  CHECK(d.find_state("T0") == nullptr);
  CHECK(d.initial == "S0");
  CHECK(d.final_state == "T1");
  const Arc* t01 = d.find_arc("t01");
  REQUIRE(t01 != nullptr);
  CHECK(t01->source == "S2");
  CHECK(d.find_state("T1")->rank > d.find_state("S2")->rank);
  CHECK(d.find_state("T1")->level_interval == 3);
  CHECK(d.mu.at(2) == Distribution{{"S2", 1.0}});
  const auto report = validate_canonical(d);
  CHECK_MESSAGE(report.ok(), format_report(report));
}

TEST_CASE("compose_sequential preconditions") {
  SUBCASE("equal horizons") {
    auto d2 = fixtures::demo2();
    d2.partition.boundaries = {0, 4};
    CHECK(code_of([&] { compose_sequential(fixtures::demo3(), d2); }) == ErrorCode::precondition_violated);
  }
  SUBCASE("id collision") {
    auto d2 = fixtures::demo2();
    d2.states[1].id = "S1";
    d2.arcs[0].target = "S1";
    d2.final_state = "S1";
    CHECK(code_of([&] { compose_sequential(fixtures::demo3(), d2); }) == ErrorCode::id_collision);
  }
  SUBCASE("population mismatch") {
    CHECK(code_of([&] { compose_sequential(fixtures::demo3(4), fixtures::demo2(5)); }) ==
          ErrorCode::precondition_violated);
  }
}

TEST_CASE("compose_sequential onto a single-state diagram extends the horizon only") {
  const auto d1 = fixtures::demo3();
  const auto d = compose_sequential(d1, fixtures::single_state(6));
  CHECK(d.partition.horizon() == 10);
  CHECK(d.states == d1.states);
  CHECK(d.arcs == d1.arcs);
  CHECK(d.final_state == "S2");
  CHECK(validate_canonical(d).ok());
}

TEST_CASE("compose_parallel of demo3 with itself") {
  const auto c = compose_parallel(fixtures::demo3(), fixtures::demo3());
  CHECK(c.states.size() == 9);
  CHECK(c.initial.id() == "(S0,S0)");
  CHECK(c.final_state.id() == "(S2,S2)");
  CHECK(c.partition.horizon() == 4);
  CHECK(CompositeDiagram::precedes(c.initial, c.final_state));
  CHECK_FALSE(CompositeDiagram::precedes(c.final_state, c.initial));
  CHECK(c.mu.at(0) == std::map<std::string, double>{{"(S0,S0)", 1.0}});
}

TEST_CASE("compose_parallel multiplies distributions and refines partitions") {
  auto d1 = fixtures::demo3();
  auto d2 = fixtures::demo3();
  d2.partition.boundaries = {0, 3, 4};
  d1.mu[1] = Distribution{{"S1", 1.0}};
  d2.mu[2] = Distribution{{"S1", 1.0}};
  SUBCASE("shared boundary") {
    auto d3 = fixtures::demo3();
    d3.mu[1] = Distribution{{"S1", 1.0}};
    const auto c = compose_parallel(d1, d3);
    CHECK(c.mu.at(1) == std::map<std::string, double>{{"(S1,S1)", 1.0}});
  }
  SUBCASE("common refinement") {
    const auto c = compose_parallel(d1, d2);
    CHECK(c.partition.boundaries == std::vector<Tick>{0, 2, 3, 4});
    CHECK(c.mu.count(1) == 0);  // only d1 prescribes τ=2
    CHECK(c.mu.count(3) == 0);  // d1 is silent at τ=4
    d1.mu[2] = Distribution{{"S2", 1.0}};
    CHECK(compose_parallel(d1, d2).mu.at(3) == std::map<std::string, double>{{"(S2,S1)", 1.0}});
  }
}

TEST_CASE("compose_parallel requires equal horizons") {
  CHECK(code_of([&] { compose_parallel(fixtures::demo3(), fixtures::demo2()); }) ==
        ErrorCode::precondition_violated);
}

namespace {

struct AggregationInputs {
  CanonicalDiagram parent;
  CanonicalDiagram c1;
  CanonicalDiagram c2;
};

AggregationInputs aggregation_inputs() {
  auto f = fixtures::parent_child();
  return {f.diagrams[0], f.diagrams[1], f.diagrams[2]};
}

}  // namespace

TEST_CASE("validate_aggregation on the parent-child fixture") {
  const auto in = aggregation_inputs();
  auto map = fixtures::parent_child_map();
  SUBCASE("valid") {
    const auto r = validate_aggregation({&in.c1, &in.c2}, map, in.parent);
    CHECK_MESSAGE(r.ok(), format_report(r));
  }
  SUBCASE("overlapping blocks") {
    map.blocks[0].combos.push_back({"S1", "S1"});
    const auto r = validate_aggregation({&in.c1, &in.c2}, map, in.parent);
    CHECK(r.has_code("aggregation.overlap"));
    CHECK(r.mentions("(S1,S1)"));
  }
  SUBCASE("monotonicity witness") {
    map.blocks = {AggregationBlock{"P1", {{"S0", "S0"}}}, AggregationBlock{"P0", {{"S1", "S1"}}}};
    const auto r = validate_aggregation({&in.c1, &in.c2}, map, in.parent);
    REQUIRE(r.has_code("aggregation.monotonicity"));
    const auto it = std::find_if(r.issues.begin(), r.issues.end(),
                                 [](const Issue& i) { return i.code == "aggregation.monotonicity"; });
    CHECK(it->subjects == std::vector<std::string>{"(S0,S0)", "(S1,S1)"});
    CHECK(r.has_code("aggregation.uncovered"));
  }
  SUBCASE("uncovered combo") {
    map.blocks[1].combos.pop_back();
    const auto r = validate_aggregation({&in.c1, &in.c2}, map, in.parent);
    CHECK(r.has_code("aggregation.uncovered"));
    CHECK(r.mentions("(S1,S1)"));
  }
  SUBCASE("malformed combo") {
    map.blocks[1].combos.push_back({"S9", "S0"});
    CHECK(validate_aggregation({&in.c1, &in.c2}, map, in.parent).has_code("aggregation.combo"));
  }
}

TEST_CASE("validate_coupling on the parent-child fixture") {
  auto f = fixtures::parent_child();
  SUBCASE("valid") {
    const auto model = f.assemble();
    const auto r = validate_coupling(model);
    CHECK_MESSAGE(r.ok(), format_report(r));
  }
  SUBCASE("child arcs stay inside one block") {
    // Widen the P0 block so firing both children never leaves it.
    f.maps[0].blocks = {AggregationBlock{"P0", {{"S0", "S0"}, {"S1", "S1"}, {"S1", "S0"}, {"S0", "S1"}}}};
    f.maps[0].blocks.push_back(AggregationBlock{"P1", {}});
    const auto r = validate_model(HsgdModel{{{"P", f.diagrams[0]}, {"C1", f.diagrams[1]}, {"C2", f.diagrams[2]}},
                                            f.topology,
                                            {{"P", f.maps[0]}},
                                            f.couplings,
                                            f.rule,
                                            2});
    CHECK(r.mentions("coupling does not cross blocks"));
  }
  SUBCASE("general symbol on an isolated arc") {
    f.rule.symbols[0].symbol_class = SymbolClass::general;
    try {
      f.assemble();
      FAIL("expected AssemblyRejected");
    } catch (const AssemblyRejected& e) {
      CHECK(e.report().mentions("symbol class mismatch"));
      CHECK(e.code() == ErrorCode::assembly_rejected);
    }
  }
  SUBCASE("quorum out of range") {
    f.couplings[0].quorum = 3;
    CHECK(code_of([&] { f.assemble(); }) == ErrorCode::assembly_rejected);
  }
  SUBCASE("quorum defaults to all children") {
    f.couplings[0].quorum.reset();
    CHECK(f.couplings[0].effective_quorum() == 2);
    CHECK(f.assemble().couplings[0].effective_quorum() == 2);
  }
}

TEST_CASE("assemble the parent-child fixture") {
  const auto f = fixtures::parent_child();
  const auto model = f.assemble();
  CHECK(model.levels == 2);
  CHECK(model.children_of("P") == std::vector<DiagramId>{"C1", "C2"});
  CHECK(model.parent_of("C2") == DiagramId{"P"});
  CHECK_FALSE(model.parent_of("P").has_value());
  CHECK(model.coupled_arcs().size() == 3);
  CHECK(model.isolated_arcs().empty());
  CHECK(model.find_symbol("g")->symbol_class == SymbolClass::general);
  CHECK(model == f.assemble());
}

TEST_CASE("assemble rejects malformed topologies") {
  auto f = fixtures::parent_child();
  SUBCASE("cycle") {
    f.topology.push_back(TopologyEdge{"C1", {"P"}});
    try {
      f.assemble();
      FAIL("expected AssemblyRejected");
    } catch (const AssemblyRejected& e) {
      CHECK(e.report().mentions("topology not a forest"));
    }
  }
  SUBCASE("missing aggregation map") {
    f.maps.clear();
    try {
      f.assemble();
      FAIL("expected AssemblyRejected");
    } catch (const AssemblyRejected& e) {
      CHECK(e.report().mentions("missing aggregation map"));
    }
  }
  SUBCASE("unknown child") {
    f.topology[0].children.push_back("C3");
    CHECK(code_of([&] { f.assemble(); }) == ErrorCode::assembly_rejected);
  }
  SUBCASE("invalid diagram") {
    f.diagrams[1].arcs[0].target = "S9";
    CHECK(code_of([&] { f.assemble(); }) == ErrorCode::assembly_rejected);
  }
}

TEST_CASE("assemble a lone diagram") {
  const auto model = assemble({fixtures::demo3()}, {}, {}, {}, {});
  CHECK(model.levels == 1);
  CHECK(model.isolated_arcs().size() == 2);
}

TEST_CASE("property: sequential composition preserves validity and counts") {
  std::mt19937_64 rng(20261017);
  for (int trial = 0; trial < 200; ++trial) {
    auto d1 = testing::random_diagram(rng, "a");
    auto d2 = testing::random_diagram(rng, "b");
    d2.population = d1.population;
    if (d1.partition.horizon() >= d2.partition.horizon()) {
      d2.partition.boundaries.back() = d1.partition.horizon() + 1 +
                                       (d2.partition.boundaries.back() - d2.partition.boundaries.end()[-2]);
      for (std::size_t i = 1; i + 1 < d2.partition.boundaries.size(); ++i) {
        d2.partition.boundaries[i] = static_cast<Tick>(i);
      }
    }
    CAPTURE(trial);
    REQUIRE(validate_canonical(d2).ok());
    const auto d = compose_sequential(d1, d2);
    CHECK(d.states.size() == d1.states.size() + d2.states.size() - 1);
    CHECK(d.partition.horizon() == d1.partition.horizon() + d2.partition.horizon());
    const auto r = validate_canonical(d);
    CHECK_MESSAGE(r.ok(), format_report(r));
  }
}

TEST_CASE("property: parallel composition has n1*n2 states and keeps the horizon") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d1 = testing::random_diagram(rng, "a");
    auto d2 = testing::random_diagram(rng, "b");
    d2.partition.boundaries.back() =
        std::max(d1.partition.horizon(), d2.partition.boundaries.end()[-2] + 1);
    if (d2.partition.horizon() != d1.partition.horizon()) continue;
    const auto c = compose_parallel(d1, d2);
    CHECK(c.states.size() == d1.states.size() * d2.states.size());
    CHECK(c.partition.horizon() == d1.partition.horizon());
    double mass = 0.0;
    for (const auto& [_, v] : c.mu.at(0)) mass += v;
    CHECK(mass == doctest::Approx(1.0));
  }
}

namespace {

// Nondecreasing check of the block rank along one random maximal chain from
// the bottom combo to the top combo, stepping one coordinate at a time.
bool random_chain_monotone(std::mt19937_64& rng, const std::vector<const CanonicalDiagram*>& children,
                           const AggregationMap& map, const CanonicalDiagram& parent, const Combo& through_a,
                           const Combo& through_b) {
  const std::size_t k = children.size();
  std::vector<std::vector<StateId>> axes;
  for (const auto* c : children) axes.push_back(c->states_by_rank());
  std::vector<std::size_t> pos(k, 0);
  auto index_of = [&](std::size_t i, const StateId& s) {
    return static_cast<std::size_t>(std::find(axes[i].begin(), axes[i].end(), s) - axes[i].begin());
  };
  // Waypoints: bottom, a, b, top; the chain visits them in order.
  std::vector<std::vector<std::size_t>> waypoints;
  for (const Combo* c : {&through_a, &through_b}) {
    if (c->empty()) continue;
    std::vector<std::size_t> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = index_of(i, (*c)[i]);
    waypoints.push_back(w);
  }
  std::vector<std::size_t> top(k);
  for (std::size_t i = 0; i < k; ++i) top[i] = axes[i].size() - 1;
  waypoints.push_back(top);

  int last_rank = -1;
  auto visit = [&] {
    Combo c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = axes[i][pos[i]];
    const auto p = map.parent_of(c);
    if (!p) return true;
    const int r = parent.find_state(*p)->rank;
    const bool ok = r >= last_rank;
    last_rank = r;
    return ok;
  };
  bool monotone = visit();
  for (const auto& w : waypoints) {
    while (pos != w) {
      std::vector<std::size_t> movable;
      for (std::size_t i = 0; i < k; ++i) {
        if (pos[i] < w[i]) movable.push_back(i);
      }
      pos[movable[std::uniform_int_distribution<std::size_t>(0, movable.size() - 1)(rng)]] += 1;
      monotone = visit() && monotone;
    }
  }
  return monotone;
}

}  // namespace

TEST_CASE("property: monotonicity agrees with random chains") {
  std::mt19937_64 rng(99);
  testing::DiagramShape shape;
  shape.max_states = 3;
  for (int trial = 0; trial < 300; ++trial) {
    const auto c1 = testing::random_diagram(rng, "c1", shape);
    const auto c2 = testing::random_diagram(rng, "c2", shape);
    const auto parent = testing::random_diagram(rng, "p", shape);
    AggregationMap map;
    map.parent = parent.id;
    map.children = {c1.id, c2.id};
    std::map<StateId, AggregationBlock> blocks;
    for (const auto& a : c1.states_by_rank()) {
      for (const auto& b : c2.states_by_rank()) {
        const auto& target = parent.states[std::uniform_int_distribution<std::size_t>(0, parent.states.size() - 1)(rng)];
        blocks[target.id].parent_state = target.id;
        blocks[target.id].combos.push_back({a, b});
      }
    }
    for (auto& [_, b] : blocks) map.blocks.push_back(b);

    const std::vector<const CanonicalDiagram*> children{&c1, &c2};
    const auto r = validate_aggregation(children, map, parent);
    CAPTURE(trial);
    const auto it = std::find_if(r.issues.begin(), r.issues.end(),
                                 [](const Issue& i) { return i.code == "aggregation.monotonicity"; });
    if (it == r.issues.end()) {
      for (int k = 0; k < 10; ++k) CHECK(random_chain_monotone(rng, children, map, parent, {}, {}));
    } else {
      REQUIRE(it->subjects.size() == 2);
      auto parse = [](const std::string& s) {
        Combo c;
        std::string cur;
        for (char ch : s.substr(1, s.size() - 2)) {
          if (ch == ',') {
            c.push_back(cur);
            cur.clear();
          } else {
            cur += ch;
          }
        }
        c.push_back(cur);
        return c;
      };
      CHECK_FALSE(random_chain_monotone(rng, children, map, parent, parse(it->subjects[0]), parse(it->subjects[1])));
    }
  }
}
