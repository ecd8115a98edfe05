#include "closure.hpp"

#include <algorithm>

namespace hsgd::testing {

Classifier closure_classifier(const CanonicalDiagram& diagram) {
  Classifier c;
  c.dimension = 1;
  const auto order = diagram.states_by_rank();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double lo = 10.0 * static_cast<double>(k);
    c.root.propositions.push_back(
        Proposition{"K" + std::to_string(k), {Predicate{0, lo, lo + 5.0}}, order[k], diagram.find_state(order[k])->rank});
  }
  return c;
}

std::vector<io::MonitoringRecord> records_from_run(const Trajectory& trajectory, const HsgdModel& model) {
  struct Move {
    Tick depart;
    Tick arrive;
    StateId target;
  };
  std::vector<io::MonitoringRecord> out;
  const auto len = static_cast<std::size_t>(trajectory.horizon + 1);
  // Per diagram, the value each object reports at each tick.
  std::map<DiagramId, std::vector<std::vector<double>>> values;
  for (const auto& [id, trace] : trajectory.diagrams) {
    const auto& d = *model.find_diagram(id);
    const auto order = d.states_by_rank();
    auto ordinal = [&](const StateId& s) {
      return static_cast<double>(std::find(order.begin(), order.end(), s) - order.begin());
    };
    std::vector<StateId> start;
    for (const auto& s : order) {
      for (Count n = 0; n < trace.initial_counts.at(s); ++n) start.push_back(s);
    }
    std::vector<std::vector<Move>> moves(start.size());
    for (const auto& e : trajectory.events) {
      if (e.diagram != id || !e.departs()) continue;
      const auto* arc = d.find_arc(e.arc);
      for (auto o : e.objects) moves[static_cast<std::size_t>(o)].push_back(Move{e.tick, e.arrival, arc->target});
    }
    auto& v = values[id];
    v.assign(start.size(), std::vector<double>(len, 0.0));
    for (std::size_t o = 0; o < start.size(); ++o) {
      StateId at = start[o];
      std::size_t m = 0;
      for (std::size_t t = 0; t < len; ++t) {
        const auto tick = static_cast<Tick>(t);
        if (m < moves[o].size() && moves[o][m].arrive == tick) {
          at = moves[o][m].target;
          ++m;
        }
        const bool moving = m < moves[o].size() && moves[o][m].depart < tick;
        v[o][t] = 10.0 * ordinal(at) + (moving ? 7.0 : 1.0);
      }
    }
  }
  for (std::size_t t = 0; t < len; ++t) {
    for (const auto& [id, v] : values) {
      for (std::size_t o = 0; o < v.size(); ++o) {
        out.push_back(io::MonitoringRecord{static_cast<Tick>(t), "o" + std::to_string(o), id, {v[o][t]}});
      }
    }
  }
  return out;
}

}  // namespace hsgd::testing
