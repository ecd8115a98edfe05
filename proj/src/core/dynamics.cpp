#include <algorithm>
#include <map>

#include "hsgd/core.hpp"
#include "hsgd/error.hpp"
#include "hsgd/kernels.hpp"

namespace hsgd {

ActualDynamics make_dynamics(const CanonicalDiagram& diagram, Tick horizon) {
  const auto len = static_cast<std::size_t>(std::max<Tick>(horizon, 0) + 1);
  ActualDynamics dyn;
  dyn.diagram = diagram.id;
  dyn.population = diagram.population;
  const auto counts = diagram.initial_counts();
  for (const auto& s : diagram.states) {
    auto it = counts.find(s.id);
    dyn.occupancy[s.id] = std::vector<Count>(len, it == counts.end() ? 0 : it->second);
  }
  for (const auto& a : diagram.arcs) {
    dyn.eta[a.id] = std::vector<Count>(len, 0);
  }
  dyn.in_transit.assign(len, 0);
  return dyn;
}

ValidationReport check_dynamics(const ActualDynamics& dynamics) {
  ValidationReport report;
  const auto len = dynamics.in_transit.size();
  std::vector<Count> column;
  for (std::size_t t = 0; t < len; ++t) {
    column.clear();
    for (const auto& [state, series] : dynamics.occupancy) {
      if (series.size() != len) {
        report.add("dynamics.length", "occupancy series of " + state + " has the wrong length", {state});
        return report;
      }
      if (series[t] < 0) {
        report.add("dynamics.negative", "negative occupancy of " + state + " at tick " + std::to_string(t),
                   {state});
      }
      column.push_back(series[t]);
    }
    column.push_back(dynamics.in_transit[t]);
    if (kernels::sum_i64(column) != dynamics.population) {
      report.add("dynamics.conservation", "population not conserved at tick " + std::to_string(t));
    }
  }
  for (const auto& [arc, series] : dynamics.eta) {
    for (std::size_t t = 1; t < series.size(); ++t) {
      if (series[t] < series[t - 1]) {
        report.add("dynamics.counter", "counter of " + arc + " decreases at tick " + std::to_string(t), {arc});
        break;
      }
    }
  }
  return report;
}

ActualDynamics advance_population(const CanonicalDiagram& diagram, ActualDynamics dynamics,
                                  std::span<const PopulationEvent> events) {
  const Tick horizon = dynamics.horizon();
  std::vector<const PopulationEvent*> ordered;
  for (const auto& e : events) {
    ordered.push_back(&e);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->departure < b->departure; });

  // Departures already booked per (state, tick); snapshots only see them from
  // the next tick on.
  std::map<std::pair<StateId, Tick>, Count> booked;
  for (const auto* e : ordered) {
    const auto* arc = diagram.find_arc(e->arc);
    if (arc == nullptr || dynamics.eta.count(e->arc) == 0) {
      throw Error(ErrorCode::unknown_arc, e->arc);
    }
    if (e->departure < 0 || e->departure > horizon) {
      throw Error(ErrorCode::tick_out_of_range, "departure " + std::to_string(e->departure));
    }
    auto& src = dynamics.occupancy.at(arc->source);
    auto& dst = dynamics.occupancy.at(arc->target);
    auto& used = booked[{arc->source, e->departure}];
    const auto d = static_cast<std::size_t>(e->departure);
    if (e->count < 0 || src[d] - used < e->count) {
      throw Error(ErrorCode::insufficient_occupancy,
                  "arc " + e->arc + " moves " + std::to_string(e->count) + " objects out of " + arc->source +
                      " holding " + std::to_string(src[d] - used) + " at tick " + std::to_string(e->departure));
    }
    used += e->count;
    const Tick arrival = e->departure + std::max<Tick>(arc->transit, 1);
    auto& eta = dynamics.eta.at(e->arc);
    for (Tick t = e->departure + 1; t <= horizon; ++t) {
      const auto i = static_cast<std::size_t>(t);
      src[i] -= e->count;
      if (t >= arrival) {
        dst[i] += e->count;
        eta[i] += e->count;
      } else {
        dynamics.in_transit[i] += e->count;
      }
      if (src[i] < 0) {
        // Objects already booked out by an earlier call drained the source.
        throw Error(ErrorCode::insufficient_occupancy,
                    "state " + arc->source + " would hold a negative count at tick " + std::to_string(t));
      }
    }
  }
  return dynamics;
}

Distribution distribution_at(const ActualDynamics& dynamics, Tick tick) {
  if (tick < 0 || tick > dynamics.horizon()) {
    throw Error(ErrorCode::tick_out_of_range, "tick " + std::to_string(tick));
  }
  Distribution d;
  const auto pop = static_cast<double>(dynamics.population);
  for (const auto& [state, series] : dynamics.occupancy) {
    d[state] = pop > 0 ? static_cast<double>(series[static_cast<std::size_t>(tick)]) / pop : 0.0;
  }
  return d;
}

double compare_distributions(const Distribution& expected, const Distribution& observed) {
  if (expected.size() != observed.size()) {
    throw Error(ErrorCode::state_set_mismatch, "distributions cover different state sets");
  }
  std::vector<double> a;
  std::vector<double> b;
  a.reserve(expected.size());
  b.reserve(expected.size());
  auto it = observed.begin();
  for (const auto& [state, value] : expected) {
    if (it->first != state) {
      throw Error(ErrorCode::state_set_mismatch, "state " + state + " missing from observed distribution");
    }
    a.push_back(value);
    b.push_back(it->second);
    ++it;
  }
  return kernels::l1_distance(a, b);
}

}  // namespace hsgd
