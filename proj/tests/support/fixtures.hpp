#pragma once

#include "hsgd/core.hpp"

namespace hsgd::fixtures {

// S0 < S1 < S2, forward a01/a12 with θ = 1, backstep b10, partition (0, 2, 4).
inline CanonicalDiagram demo3(Count population = 4) {
  CanonicalDiagram d;
  d.id = "demo3";
  d.partition.boundaries = {0, 2, 4};
  d.states = {
      StateNode{"S0", 0, 0, std::nullopt},
      StateNode{"S1", 1, 1, std::nullopt},
      StateNode{"S2", 2, 2, std::nullopt},
  };
  d.arcs = {
      Arc{"a01", "S0", "S1", ArcKind::forward, 1},
      Arc{"a12", "S1", "S2", ArcKind::forward, 1},
      Arc{"b10", "S1", "S0", ArcKind::backstep, 0},
  };
  d.mu[0] = Distribution{{"S0", 1.0}};
  d.population = population;
  d.initial = "S0";
  d.final_state = "S2";
  return d;
}

// S0' -> S1' over horizon 6.
inline CanonicalDiagram demo2(Count population = 4) {
  CanonicalDiagram d;
  d.id = "demo2";
  d.partition.boundaries = {0, 3, 6};
  d.states = {
      StateNode{"T0", 0, 0, std::nullopt},
      StateNode{"T1", 1, 1, std::nullopt},
  };
  d.arcs = {Arc{"t01", "T0", "T1", ArcKind::forward, 2}};
  d.mu[0] = Distribution{{"T0", 1.0}};
  d.population = population;
  d.initial = "T0";
  d.final_state = "T1";
  return d;
}

inline CanonicalDiagram single_state(Tick horizon, Count population = 4) {
  CanonicalDiagram d;
  d.id = "single";
  d.partition.boundaries = {0, horizon};
  d.states = {StateNode{"U0", 0, 0, std::nullopt}};
  d.mu[0] = Distribution{{"U0", 1.0}};
  d.population = population;
  d.initial = "U0";
  d.final_state = "U0";
  return d;
}

}  // namespace hsgd::fixtures

#include "hsgd/classifier.hpp"

namespace hsgd::fixtures {

inline Predicate range(std::size_t param, std::optional<double> lo, std::optional<double> hi) {
  return Predicate{param, lo, hi};
}

// S0: x < 10, S1: 10 <= x < 20, S2: x >= 20.
inline Classifier demo3_classifier() {
  Classifier c;
  c.dimension = 1;
  c.root.propositions = {
      Proposition{"K0", {range(0, std::nullopt, 10.0)}, "S0", 0},
      Proposition{"K1", {range(0, 10.0, 20.0)}, "S1", 1},
      Proposition{"K2", {range(0, 20.0, std::nullopt)}, "S2", 2},
  };
  return c;
}

// demo3 scale with S1 refined into S1a [10, 15) and S1b [15, 20).
inline Classifier two_level_classifier() {
  auto c = demo3_classifier();
  c.refinements["K1"].propositions = {
      Proposition{"K1a", {range(0, 10.0, 15.0)}, "S1a", 10},
      Proposition{"K1b", {range(0, 15.0, 20.0)}, "S1b", 11},
  };
  return c;
}

}  // namespace hsgd::fixtures

#include "hsgd/hierarchy.hpp"

namespace hsgd::fixtures {

inline CanonicalDiagram two_state(const DiagramId& id, const StateId& s0, const StateId& s1, const ArcId& arc,
                                  Tick transit, Count population, std::vector<Tick> boundaries) {
  CanonicalDiagram d;
  d.id = id;
  d.partition.boundaries = std::move(boundaries);
  d.states = {StateNode{s0, 0, std::nullopt, std::nullopt}, StateNode{s1, 1, std::nullopt, std::nullopt}};
  d.arcs = {Arc{arc, s0, s1, ArcKind::forward, transit}};
  d.population = population;
  d.initial = s0;
  d.final_state = s1;
  return d;
}

// Parent P (P0 -> P1 via p01) over children C1 (c1) and C2 (c2).
struct ParentChild {
  std::vector<CanonicalDiagram> diagrams;
  std::vector<TopologyEdge> topology;
  std::vector<AggregationMap> maps;
  std::vector<CoupledArc> couplings;
  InterLevelRule rule;

  HsgdModel assemble() const { return hsgd::assemble(diagrams, topology, maps, couplings, rule); }
};

inline AggregationMap parent_child_map() {
  AggregationMap m;
  m.parent = "P";
  m.children = {"C1", "C2"};
  m.blocks = {
      AggregationBlock{"P0", {{"S0", "S0"}}},
      AggregationBlock{"P1", {{"S1", "S0"}, {"S0", "S1"}, {"S1", "S1"}}},
  };
  return m;
}

inline ParentChild parent_child(Count population = 1) {
  ParentChild f;
  f.diagrams = {
      two_state("P", "P0", "P1", "p01", 2, population, {0, 4, 8}),
      two_state("C1", "S0", "S1", "c1", 1, population, {0, 4, 8}),
      two_state("C2", "S0", "S1", "c2", 1, population, {0, 4, 8}),
  };
  f.topology = {TopologyEdge{"P", {"C1", "C2"}}};
  f.maps = {parent_child_map()};
  f.couplings = {CoupledArc{ArcRef{"P", "p01"}, {ArcRef{"C1", "c1"}, ArcRef{"C2", "c2"}}, 2}};
  f.rule.symbols = {
      ControlSymbol{"x_c1", SymbolClass::individual, ArcRef{"C1", "c1"}, 1.0},
      ControlSymbol{"x_c2", SymbolClass::individual, ArcRef{"C2", "c2"}, 1.0},
      ControlSymbol{"g", SymbolClass::general, ArcRef{"P", "p01"}, 3.0},
  };
  return f;
}

}  // namespace hsgd::fixtures

#include "hsgd/engine.hpp"

namespace hsgd::fixtures {

// demo3 as a one-diagram model; x01 costs 2 and x12 costs 3.
inline HsgdModel demo3_model(CanonicalDiagram d = demo3()) {
  InterLevelRule rule;
  rule.symbols = {
      ControlSymbol{"x01", SymbolClass::individual, ArcRef{d.id, "a01"}, 2.0},
      ControlSymbol{"x12", SymbolClass::individual, ArcRef{d.id, "a12"}, 3.0},
  };
  return hsgd::assemble({std::move(d)}, {}, {}, {}, std::move(rule));
}

inline ControlScenario scenario(std::string id, TimeDiagram schedule, Tick horizon) {
  ControlScenario s;
  s.id = std::move(id);
  s.schedule = std::move(schedule);
  s.horizon = horizon;
  return s;
}

}  // namespace hsgd::fixtures

#include "hsgd/planner.hpp"

namespace hsgd::fixtures {

// S0 -> S1 -> S2 plus the shortcut a02; objects idle in S1 for 3 ticks fall
// back to S0.
inline CanonicalDiagram plan3() {
  CanonicalDiagram d;
  d.id = "plan3";
  d.partition.boundaries = {0, 3, 6};
  d.states = {
      StateNode{"S0", 0, std::nullopt, std::nullopt},
      StateNode{"S1", 1, std::nullopt, 3},
      StateNode{"S2", 2, std::nullopt, std::nullopt},
  };
  d.arcs = {
      Arc{"a01", "S0", "S1", ArcKind::forward, 1},
      Arc{"a12", "S1", "S2", ArcKind::forward, 2},
      Arc{"a02", "S0", "S2", ArcKind::forward, 2},
      Arc{"b10", "S1", "S0", ArcKind::backstep, 0},
  };
  d.population = 1;
  d.initial = "S0";
  d.final_state = "S2";
  return d;
}

inline std::vector<TransitionRule> plan3_rules() {
  return {
      TransitionRule{"r1", "S0", "S1", std::nullopt, "u1", 2.0, 1},
      TransitionRule{"r2", "S1", "S2", "S0", "u2", 3.0, 2},
      TransitionRule{"r3", "S0", "S2", std::nullopt, "u3", 6.0, 2},
  };
}

inline HsgdModel plan3_model() {
  InterLevelRule rule;
  rule.symbols = {
      ControlSymbol{"u1", SymbolClass::individual, ArcRef{"plan3", "a01"}, 2.0},
      ControlSymbol{"u2", SymbolClass::individual, ArcRef{"plan3", "a12"}, 3.0},
      ControlSymbol{"u3", SymbolClass::individual, ArcRef{"plan3", "a02"}, 6.0},
  };
  return hsgd::assemble({plan3()}, {}, {}, {}, std::move(rule));
}

}  // namespace hsgd::fixtures
