#include <algorithm>
#include <array>

#include "hsgd/engine.hpp"
#include "hsgd/error.hpp"

namespace hsgd {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 7> kEventNames{{
    {EventKind::individual, "individual"},
    {EventKind::general, "general"},
    {EventKind::cascade, "cascade"},
    {EventKind::upward, "upward"},
    {EventKind::suppressed, "suppressed"},
    {EventKind::backstep, "backstep"},
    {EventKind::arrival, "arrival"},
}};

class Stepper {
 public:
  Stepper(const HsgdModel& model, SimState& state, std::vector<Event>& events)
      : model_(model), st_(state), events_(events) {
    for (std::size_t i = 0; i < model.couplings.size(); ++i) {
      parent_coupling_.emplace(model.couplings[i].parent, i);
    }
    for (const auto& ref : model.coupled_arcs()) coupled_.insert(ref);
  }

  void check_consistent(Tick tick) const {
    if (tick != st_.tick || tick > st_.horizon) {
      throw Error(ErrorCode::inconsistent_state, "step at tick " + std::to_string(tick) + " but the state expects " +
                                                     std::to_string(st_.tick) + " within horizon " +
                                                     std::to_string(st_.horizon));
    }
    for (const auto& [id, d] : model_.diagrams) {
      auto it = st_.objects.find(id);
      if (it == st_.objects.end() || static_cast<Count>(it->second.size()) != d.population) {
        throw Error(ErrorCode::inconsistent_state, "object count of " + id + " differs from its population");
      }
      for (const auto& o : it->second) {
        if (o.in_transit() ? (d.find_arc(o.arc) == nullptr || o.arrival < tick) : d.find_state(o.state) == nullptr) {
          throw Error(ErrorCode::inconsistent_state, "object of " + id + " is in an unknown or overdue position");
        }
      }
    }
  }

  void arrivals(Tick t) {
    for (auto& [id, objs] : st_.objects) {
      const auto& d = model_.diagrams.at(id);
      std::map<ArcId, std::vector<std::int32_t>> by_arc;
      for (std::size_t i = 0; i < objs.size(); ++i) {
        if (objs[i].in_transit() && objs[i].arrival == t) by_arc[objs[i].arc].push_back(static_cast<std::int32_t>(i));
      }
      for (auto& [arc_id, members] : by_arc) {
        const Arc& arc = *d.find_arc(arc_id);
        const ArcRef ref{id, arc_id};
        for (auto i : members) {
          auto& o = objs[static_cast<std::size_t>(i)];
          o.state = arc.target;
          o.arc.clear();
          o.entry = t;
          if (arc.kind == ArcKind::forward) {
            o.reached.insert(arc.target);
            ++st_.stats.forward_completions;
            if (coupled_.count(ref) != 0) ++st_.stats.coupled_completions;
          }
        }
        if (arc.kind == ArcKind::forward) st_.last_completion[ref] = t;
        events_.push_back(Event{t, EventKind::arrival, id, arc_id, {}, std::move(members), 0});
      }
    }
  }

  void snapshot(StepResult& out) const {
    for (const auto& [id, objs] : st_.objects) {
      auto& counts = out.snapshot[id];
      for (const auto& s : model_.diagrams.at(id).states) counts[s.id] = 0;
      Count transit = 0;
      for (const auto& o : objs) {
        if (o.in_transit()) {
          ++transit;
        } else {
          ++counts[o.state];
        }
      }
      out.in_transit[id] = transit;
    }
  }

  void apply_symbols(Tick t, const std::vector<const ControlSymbol*>& symbols) {
    for (const auto* s : symbols) {
      if (s->symbol_class != SymbolClass::general) continue;
      st_.stats.resource += s->cost;
      fire(t, s->arc, EventKind::general, s->id);
      if (auto it = parent_coupling_.find(s->arc); it != parent_coupling_.end()) {
        mark_general(t, it->second);
        cascade(t, it->second, s->id);
      }
    }
    for (const auto* s : symbols) {
      if (s->symbol_class != SymbolClass::individual) continue;
      st_.stats.resource += s->cost;
      fire(t, s->arc, EventKind::individual, s->id);
    }
  }

  void propagate_upward(Tick t) {
    for (std::size_t j = 0; j < model_.couplings.size(); ++j) {
      const auto& c = model_.couplings[j];
      const auto& partition = model_.diagrams.at(c.parent.diagram).partition;
      const int k = partition.interval_of(t);
      if (st_.quorum_met.count({j, k}) != 0) continue;
      int fired = 0;
      for (const auto& child : c.children) {
        auto it = st_.last_completion.find(child);
        if (it != st_.last_completion.end() && partition.interval_of(it->second) == k) ++fired;
      }
      if (fired < c.effective_quorum()) continue;
      st_.quorum_met.insert({j, k});
      if (st_.general_fired.count({j, k}) != 0) {
        events_.push_back(Event{t, EventKind::suppressed, c.parent.diagram, c.parent.arc, {}, {}, 0});
        if (st_.redundant.insert({j, k}).second) ++st_.stats.redundancy;
      } else {
        fire(t, c.parent, EventKind::upward, {});
      }
    }
  }

  void backsteps(Tick t) {
    for (auto& [id, objs] : st_.objects) {
      const auto& d = model_.diagrams.at(id);
      std::map<ArcId, std::vector<std::int32_t>> by_arc;
      for (std::size_t i = 0; i < objs.size(); ++i) {
        auto& o = objs[i];
        if (o.in_transit()) continue;
        const StateNode* node = d.find_state(o.state);
        if (!node->dwell_limit || t - o.entry < *node->dwell_limit) continue;
        const Arc* best = nullptr;
        int best_rank = 0;
        for (const auto& a : d.arcs) {
          if (a.kind != ArcKind::backstep || a.source != o.state || guarded(id, a.target, t)) continue;
          const int r = d.find_state(a.target)->rank;
          if (best == nullptr || r < best_rank || (r == best_rank && a.id < best->id)) {
            best = &a;
            best_rank = r;
          }
        }
        if (best == nullptr) continue;
        ++st_.stats.backsteps;
        if (o.reached.count(o.state) != 0) ++st_.stats.omitted_backsteps;
        o.arc = best->id;
        o.arrival = t + 1;
        by_arc[best->id].push_back(static_cast<std::int32_t>(i));
      }
      for (auto& [arc_id, members] : by_arc) {
        events_.push_back(Event{t, EventKind::backstep, id, arc_id, {}, std::move(members), t + 1});
      }
    }
  }

 private:
  void fire(Tick t, const ArcRef& ref, EventKind kind, const std::string& symbol) {
    const Arc& arc = *model_.find_arc(ref);
    Event e{t, kind, ref.diagram, ref.arc, symbol, {}, t + std::max<Tick>(arc.transit, 1)};
    auto& objs = st_.objects.at(ref.diagram);
    for (std::size_t i = 0; i < objs.size(); ++i) {
      auto& o = objs[i];
      if (!o.in_transit() && o.state == arc.source) {
        o.arc = arc.id;
        o.arrival = e.arrival;
        e.objects.push_back(static_cast<std::int32_t>(i));
      }
    }
    events_.push_back(std::move(e));
  }

  void mark_general(Tick t, std::size_t j) {
    const int k = model_.diagrams.at(model_.couplings[j].parent.diagram).partition.interval_of(t);
    st_.general_fired.insert({j, k});
    if (st_.quorum_met.count({j, k}) != 0 && st_.redundant.insert({j, k}).second) ++st_.stats.redundancy;
  }

  void cascade(Tick t, std::size_t j, const std::string& symbol) {
    for (const auto& child : model_.couplings[j].children) {
      fire(t, child, EventKind::cascade, symbol);
      if (auto it = parent_coupling_.find(child); it != parent_coupling_.end()) {
        mark_general(t, it->second);
        cascade(t, it->second, symbol);
      }
    }
  }

  bool guarded(const DiagramId& d, const StateId& target, Tick t) const {
    return std::any_of(st_.guards.begin(), st_.guards.end(), [&](const BackstepGuard& g) {
      return g.state.diagram == d && g.state.state == target && g.from <= t && t <= g.until;
    });
  }

  const HsgdModel& model_;
  SimState& st_;
  std::vector<Event>& events_;
  std::map<ArcRef, std::size_t> parent_coupling_;
  std::set<ArcRef> coupled_;
};

std::vector<const ControlSymbol*> resolve_symbols(const HsgdModel& model, const SymbolSet& symbols) {
  std::vector<const ControlSymbol*> out;
  for (const auto& id : symbols) {
    const auto* s = model.find_symbol(id);
    if (s == nullptr) throw Error(ErrorCode::unknown_symbol, "unknown control symbol " + id);
    out.push_back(s);
  }
  return out;
}

void step_in_place(const HsgdModel& model, SimState& state, Tick tick, const SymbolSet& symbols, StepResult& out) {
  Stepper stepper(model, state, out.events);
  stepper.check_consistent(tick);
  const auto resolved = resolve_symbols(model, symbols);
  stepper.arrivals(tick);
  stepper.snapshot(out);
  if (tick < state.horizon) {
    stepper.apply_symbols(tick, resolved);
    stepper.propagate_upward(tick);
    stepper.backsteps(tick);
  }
  state.tick = tick + 1;
}

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kEventNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kEventNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

ValidationReport validate_scenario(const HsgdModel& model, const ControlScenario& scenario) {
  ValidationReport report;
  Tick longest = 0;
  for (const auto& [_, d] : model.diagrams) longest = std::max(longest, d.partition.horizon());
  if (scenario.horizon < 0 || scenario.horizon > longest) {
    report.add("scenario.horizon",
               "horizon " + std::to_string(scenario.horizon) + " outside 0.." + std::to_string(longest), {scenario.id});
  }
  if (scenario.priority < 0) {
    report.add("scenario.priority", "priority must be nonnegative", {scenario.id});
  }
  for (const auto& [tick, symbols] : scenario.schedule) {
    if (tick < 0 || tick > scenario.horizon) {
      report.add("scenario.tick", "ϑ entry at tick " + std::to_string(tick) + " lies outside the horizon",
                 {std::to_string(tick)});
    }
    for (const auto& s : symbols) {
      if (model.find_symbol(s) == nullptr) {
        report.add("scenario.symbol", "unknown control symbol " + s + " at tick " + std::to_string(tick), {s});
      }
    }
  }
  for (const auto& g : scenario.guards) {
    const auto* d = model.find_diagram(g.state.diagram);
    if (d == nullptr || d->find_state(g.state.state) == nullptr) {
      report.add("scenario.guard", "guard refers to unknown state " + g.state.str(), {g.state.str()});
    } else if (g.from > g.until) {
      report.add("scenario.guard", "guard on " + g.state.str() + " ends before it starts", {g.state.str()});
    }
  }
  return report;
}

SimState initial_state(const HsgdModel& model, Tick horizon, std::vector<BackstepGuard> guards) {
  SimState st;
  st.horizon = horizon;
  st.guards = std::move(guards);
  for (const auto& [id, d] : model.diagrams) {
    auto& objs = st.objects[id];
    const auto counts = d.initial_counts();
    for (const auto& s : d.states_by_rank()) {
      auto it = counts.find(s);
      const Count n = it == counts.end() ? 0 : it->second;
      for (Count k = 0; k < n; ++k) objs.push_back(ObjectState{s, {}, 0, 0, {}});
    }
  }
  return st;
}

StepResult step(const HsgdModel& model, SimState state, Tick tick, const SymbolSet& symbols) {
  StepResult out;
  step_in_place(model, state, tick, symbols, out);
  out.state = std::move(state);
  return out;
}

Trajectory run(const HsgdModel& model, const ControlScenario& scenario) {
  const auto report = validate_scenario(model, scenario);
  if (!report.ok()) {
    if (report.has_code("scenario.symbol")) throw Error(ErrorCode::unknown_symbol, format_report(report));
    throw Error(ErrorCode::precondition_violated, format_report(report));
  }
  const Tick horizon = scenario.horizon;
  const auto size = static_cast<std::size_t>(horizon + 1);

  Trajectory traj;
  traj.scenario = scenario.id;
  traj.model = scenario.model;
  traj.horizon = horizon;
  traj.couplings = model.couplings;
  for (const auto& [id, d] : model.diagrams) {
    auto& tr = traj.diagrams[id];
    tr.diagram = id;
    tr.partition = d.partition;
    tr.states = d.states_by_rank();
    tr.arcs = d.arcs;
    tr.initial = d.initial;
    tr.final_state = d.final_state;
    tr.population = d.population;
    tr.mu = d.mu;
    tr.initial_counts = d.initial_counts();
    tr.dynamics = make_dynamics(d, horizon);
    tr.applied.assign(size, {});
    tr.cumulative_cost.assign(size, 0.0);
  }

  SimState state = initial_state(model, horizon, scenario.guards);
  const SymbolSet none;
  std::map<ArcRef, Count> completed;
  std::map<DiagramId, double> cost;
  for (Tick t = 0; t <= horizon; ++t) {
    auto it = scenario.schedule.find(t);
    StepResult out;
    step_in_place(model, state, t, it == scenario.schedule.end() ? none : it->second, out);
    const auto ti = static_cast<std::size_t>(t);
    for (const auto& e : out.events) {
      if (e.kind == EventKind::arrival) {
        completed[ArcRef{e.diagram, e.arc}] += static_cast<Count>(e.objects.size());
      } else if (e.kind == EventKind::individual || e.kind == EventKind::general) {
        traj.diagrams.at(e.diagram).applied[ti].insert(e.symbol);
        cost[e.diagram] += model.find_symbol(e.symbol)->cost;
      }
    }
    for (auto& [id, tr] : traj.diagrams) {
      Count total = out.in_transit.at(id);
      for (const auto& [s, n] : out.snapshot.at(id)) {
        tr.dynamics.occupancy[s][ti] = n;
        total += n;
      }
      if (total != tr.population) {
        throw Error(ErrorCode::inconsistent_state,
                    "conservation violated in " + id + " at tick " + std::to_string(t));
      }
      tr.dynamics.in_transit[ti] = out.in_transit.at(id);
      for (auto& [arc, series] : tr.dynamics.eta) {
        auto c = completed.find(ArcRef{id, arc});
        series[ti] = c == completed.end() ? 0 : c->second;
      }
      tr.cumulative_cost[ti] = cost[id];
    }
    traj.events.insert(traj.events.end(), std::make_move_iterator(out.events.begin()),
                       std::make_move_iterator(out.events.end()));
  }
  traj.stats = state.stats;
  return traj;
}

Trajectory run_inertial(const HsgdModel& model, Tick horizon) {
  ControlScenario scenario;
  scenario.id = "inertial";
  scenario.horizon = horizon;
  return run(model, scenario);
}

std::map<DiagramId, ActualDynamics> replay(const Trajectory& trajectory) {
  std::map<DiagramId, ActualDynamics> out;
  const auto size = static_cast<std::size_t>(trajectory.horizon + 1);
  std::map<DiagramId, std::map<ArcId, const Arc*>> arcs;
  std::map<DiagramId, std::map<StateId, Count>> current;
  std::map<DiagramId, std::map<ArcId, Count>> eta;
  for (const auto& [id, tr] : trajectory.diagrams) {
    auto& dyn = out[id];
    dyn.diagram = id;
    dyn.population = tr.population;
    dyn.in_transit.assign(size, 0);
    for (const auto& s : tr.states) {
      dyn.occupancy[s].assign(size, 0);
      current[id][s] = tr.initial_counts.count(s) != 0 ? tr.initial_counts.at(s) : 0;
    }
    for (const auto& a : tr.arcs) {
      dyn.eta[a.id].assign(size, 0);
      arcs[id][a.id] = &a;
      eta[id][a.id] = 0;
    }
  }

  std::size_t next = 0;
  const auto& events = trajectory.events;
  for (Tick t = 0; t <= trajectory.horizon; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    std::vector<const Event*> departures;
    for (; next < events.size() && events[next].tick == t; ++next) {
      const Event& e = events[next];
      const Arc* arc = arcs.at(e.diagram).at(e.arc);
      const auto n = static_cast<Count>(e.objects.size());
      if (e.kind == EventKind::arrival) {
        current[e.diagram][arc->target] += n;
        eta[e.diagram][arc->id] += n;
      } else if (e.departs()) {
        departures.push_back(&e);
      }
    }
    for (auto& [id, dyn] : out) {
      Count settled = 0;
      for (auto& [s, series] : dyn.occupancy) {
        series[ti] = current[id][s];
        settled += series[ti];
      }
      dyn.in_transit[ti] = dyn.population - settled;
      for (auto& [a, series] : dyn.eta) series[ti] = eta[id][a];
    }
    for (const Event* e : departures) {
      current[e->diagram][arcs.at(e->diagram).at(e->arc)->source] -= static_cast<Count>(e->objects.size());
    }
  }
  return out;
}

}  // namespace hsgd
