#include <algorithm>
#include <set>

#include "hsgd/error.hpp"
#include "hsgd/hierarchy.hpp"

namespace hsgd {

CanonicalDiagram compose_sequential(const CanonicalDiagram& d1, const CanonicalDiagram& d2) {
  const Tick alpha1 = d1.partition.horizon();
  const Tick alpha2 = d2.partition.horizon();
  if (!(alpha1 < alpha2)) {
    throw Error(ErrorCode::precondition_violated, "sequential composition needs α1 < α2, got " +
                                                      std::to_string(alpha1) + " and " + std::to_string(alpha2));
  }
  if (d1.population != d2.population) {
    throw Error(ErrorCode::precondition_violated, "sequential composition needs equal populations");
  }
  const StateId& glued = d1.final_state;
  const StateId& d2_start = d2.initial;
  auto rename = [&](const StateId& s) { return s == d2_start ? glued : s; };

  std::set<StateId> d1_states;
  for (const auto& s : d1.states) d1_states.insert(s.id);
  for (const auto& s : d2.states) {
    if (s.id != d2_start && d1_states.count(s.id) != 0) {
      throw Error(ErrorCode::id_collision, "state " + s.id + " exists in both diagrams");
    }
  }
  std::set<ArcId> d1_arcs;
  for (const auto& a : d1.arcs) d1_arcs.insert(a.id);
  for (const auto& a : d2.arcs) {
    if (d1_arcs.count(a.id) != 0) {
      throw Error(ErrorCode::id_collision, "arc " + a.id + " exists in both diagrams");
    }
  }

  CanonicalDiagram out;
  out.id = d1.id + "+" + d2.id;
  out.population = d1.population;
  out.initial = d1.initial;
  out.final_state = rename(d2.final_state);

  const auto n1 = static_cast<int>(d1.partition.interval_count());
  out.partition = d1.partition;
  for (std::size_t i = 1; i < d2.partition.boundaries.size(); ++i) {
    out.partition.boundaries.push_back(alpha1 + d2.partition.boundaries[i]);
  }

  int top_rank = 0;
  for (const auto& s : d1.states) top_rank = std::max(top_rank, s.rank);
  const auto* start_node = d2.find_state(d2_start);
  const int base_rank = start_node != nullptr ? start_node->rank : 0;

  out.states = d1.states;
  for (const auto& s : d2.states) {
    if (s.id == d2_start) {
      if (s.dwell_limit) {
        auto it = std::find_if(out.states.begin(), out.states.end(), [&](const StateNode& n) { return n.id == glued; });
        if (it != out.states.end() && !it->dwell_limit) it->dwell_limit = s.dwell_limit;
      }
      continue;
    }
    StateNode node = s;
    node.rank = top_rank + (s.rank - base_rank);
    if (node.level_interval) node.level_interval = *node.level_interval + n1;
    out.states.push_back(node);
  }

  out.arcs = d1.arcs;
  for (auto a : d2.arcs) {
    a.source = rename(a.source);
    a.target = rename(a.target);
    out.arcs.push_back(a);
  }

  for (const auto& [index, dist] : d1.mu) {
    if (index < n1) out.mu[index] = dist;
  }
  auto rebase = [&](const Distribution& dist) {
    Distribution r;
    for (const auto& [state, v] : dist) r[rename(state)] += v;
    return r;
  };
  out.mu[n1] = rebase(d2.initial_distribution());
  for (const auto& [index, dist] : d2.mu) {
    if (index > 0) out.mu[n1 + index] = rebase(dist);
  }
  return out;
}

CompositeDiagram compose_parallel(const CanonicalDiagram& d1, const CanonicalDiagram& d2) {
  if (d1.partition.horizon() != d2.partition.horizon()) {
    throw Error(ErrorCode::precondition_violated,
                "parallel composition needs α1 = α2, got " + std::to_string(d1.partition.horizon()) + " and " +
                    std::to_string(d2.partition.horizon()));
  }
  CompositeDiagram out;
  out.first_id = d1.id;
  out.second_id = d2.id;

  std::set<Tick> ticks(d1.partition.boundaries.begin(), d1.partition.boundaries.end());
  ticks.insert(d2.partition.boundaries.begin(), d2.partition.boundaries.end());
  out.partition.boundaries.assign(ticks.begin(), ticks.end());

  const auto order1 = d1.states_by_rank();
  const auto order2 = d2.states_by_rank();
  auto make = [&](const StateId& a, const StateId& b) {
    return CompositeState{a, b, d1.find_state(a)->rank, d2.find_state(b)->rank};
  };
  for (const auto& a : order1) {
    for (const auto& b : order2) {
      out.states.push_back(make(a, b));
    }
  }
  out.initial = make(d1.initial, d2.initial);
  out.final_state = make(d1.final_state, d2.final_state);

  auto mu_at_tick = [](const CanonicalDiagram& d, Tick tick) -> std::optional<Distribution> {
    for (std::size_t i = 0; i < d.partition.boundaries.size(); ++i) {
      if (d.partition.boundaries[i] != tick) continue;
      if (i == 0) return d.initial_distribution();
      if (auto it = d.mu.find(static_cast<int>(i)); it != d.mu.end()) return it->second;
    }
    return std::nullopt;
  };
  for (std::size_t k = 0; k < out.partition.boundaries.size(); ++k) {
    const Tick tick = out.partition.boundaries[k];
    const auto m1 = mu_at_tick(d1, tick);
    const auto m2 = mu_at_tick(d2, tick);
    if (!m1 || !m2) continue;
    auto& dist = out.mu[static_cast<int>(k)];
    for (const auto& [a, va] : *m1) {
      for (const auto& [b, vb] : *m2) {
        dist["(" + a + "," + b + ")"] = va * vb;
      }
    }
  }
  return out;
}

}  // namespace hsgd
