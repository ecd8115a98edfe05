#include <algorithm>
#include <limits>
#include <tuple>

#include "hsgd/engine.hpp"
#include "hsgd/error.hpp"

namespace hsgd {

namespace {

double ratio(Count num, Count den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::optional<Tick> first_full(const DiagramTrace& tr, const StateId& state, Tick from, Tick until) {
  const auto& series = tr.dynamics.occupancy.at(state);
  until = std::min<Tick>(until, static_cast<Tick>(series.size()) - 1);
  for (Tick t = std::max<Tick>(from, 0); t <= until; ++t) {
    if (series[static_cast<std::size_t>(t)] == tr.population) return t;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Tick> ScenarioReport::max_goal_time() const {
  Tick worst = 0;
  for (const auto& [_, t] : goal_times) {
    if (!t) return std::nullopt;
    worst = std::max(worst, *t);
  }
  return worst;
}

ScenarioReport evaluate(const Trajectory& trajectory, const ControlScenario& scenario) {
  if (trajectory.scenario != scenario.id || trajectory.model != scenario.model) {
    throw Error(ErrorCode::trajectory_model_mismatch,
                "trajectory of scenario " + trajectory.scenario + " evaluated against scenario " + scenario.id);
  }
  ScenarioReport r;
  r.scenario = scenario.id;
  r.model = scenario.model;
  r.priority = scenario.priority;
  const auto& st = trajectory.stats;
  r.redundancy_count = st.redundancy;
  r.omitted_ratio = ratio(st.omitted_backsteps, st.forward_completions + st.backsteps);
  r.complexness = ratio(st.coupled_completions, st.forward_completions);
  r.resource_total = st.resource;

  r.complete = !trajectory.diagrams.empty();
  for (const auto& [id, tr] : trajectory.diagrams) {
    const auto goal = first_full(tr, tr.final_state, 0, trajectory.horizon);
    r.goal_times[id] = goal;
    if (!goal) r.complete = false;

    for (std::size_t i = 0; i < tr.partition.boundaries.size(); ++i) {
      const Tick tau = tr.partition.boundaries[i];
      if (tau > trajectory.horizon) break;
      Distribution expected;
      if (auto it = tr.mu.find(static_cast<int>(i)); it != tr.mu.end()) {
        expected = it->second;
      } else if (i == 0) {
        expected[tr.initial] = 1.0;
      } else {
        continue;
      }
      Distribution full;
      for (const auto& s : tr.states) full[s] = expected.count(s) != 0 ? expected.at(s) : 0.0;
      r.divergence[id][static_cast<int>(i)] = compare_distributions(full, distribution_at(tr.dynamics, tau));
    }
  }

  // Priority-weighted criterion: final w summed over diagrams, less a time
  // penalty on the slowest goal (horizon + 1 when never reached).
  const auto vectors = efficiency_vectors(trajectory, scenario.criterion);
  double w_end = 0.0;
  for (const auto& [_, w] : vectors.w) w_end += w.back();
  const Tick slowest = r.max_goal_time().value_or(trajectory.horizon + 1);
  r.quality = static_cast<double>(scenario.priority) *
              (w_end - scenario.criterion.time_weight * static_cast<double>(slowest));
  return r;
}

EfficiencyVectors efficiency_vectors(const Trajectory& trajectory, const CriterionConfig& cfg) {
  EfficiencyVectors out;
  const auto size = static_cast<std::size_t>(trajectory.horizon + 1);
  for (const auto& [id, tr] : trajectory.diagrams) {
    out.u[id] = tr.applied;
    auto& s = out.s[id];
    auto& w = out.w[id];
    const auto final_pos = std::find(tr.states.begin(), tr.states.end(), tr.final_state) - tr.states.begin();
    for (std::size_t t = 0; t < size; ++t) {
      std::size_t modal = 0;
      Count best = -1;
      for (std::size_t k = 0; k < tr.states.size(); ++k) {
        const Count n = tr.dynamics.occupancy.at(tr.states[k])[t];
        if (n > best) {
          best = n;
          modal = k;
        }
      }
      // While every object is between states the subsystem keeps its last
      // modal state.
      if (best == 0 && t > 0) {
        modal = static_cast<std::size_t>(std::find(tr.states.begin(), tr.states.end(), s.back()) - tr.states.begin());
      }
      s.push_back(tr.states[modal]);
      // A single-state diagram sits at its goal from the start.
      const double progress =
          final_pos == 0 ? 1.0 : static_cast<double>(modal) / static_cast<double>(final_pos);
      w.push_back(cfg.rank_weight * progress - cfg.resource_weight * tr.cumulative_cost[t]);
    }
  }
  return out;
}

Verdict check_partial(const Trajectory& trajectory, const PartialCriterion& criterion) {
  for (std::size_t i = 1; i < criterion.supports.size(); ++i) {
    if (criterion.supports[i].deadline < criterion.supports[i - 1].deadline) {
      throw Error(ErrorCode::precondition_violated, "support deadlines must be nondecreasing");
    }
  }
  struct Resolved {
    const DiagramTrace* trace;
    std::string name;
  };
  std::vector<Resolved> resolved;
  for (const auto& sup : criterion.supports) {
    const DiagramTrace* found = nullptr;
    int matches = 0;
    for (const auto& [id, tr] : trajectory.diagrams) {
      if (!sup.state.diagram.empty() && id != sup.state.diagram) continue;
      if (std::find(tr.states.begin(), tr.states.end(), sup.state.state) != tr.states.end()) {
        found = &tr;
        ++matches;
      }
    }
    const std::string name = sup.state.diagram.empty() ? sup.state.state : sup.state.str();
    if (matches == 0) throw Error(ErrorCode::unknown_support_state, "unknown support state " + name);
    if (matches > 1) {
      throw Error(ErrorCode::unknown_support_state, "support state " + name + " is ambiguous; qualify its diagram");
    }
    resolved.push_back({found, name});
  }

  Tick from = 0;
  for (std::size_t i = 0; i < criterion.supports.size(); ++i) {
    const auto& sup = criterion.supports[i];
    const auto hit = first_full(*resolved[i].trace, sup.state.state, from, sup.deadline);
    if (!hit) {
      return Verdict{false, resolved[i].name,
                     resolved[i].name + " not fully occupied by tick " + std::to_string(sup.deadline)};
    }
    from = *hit;
  }
  if (criterion.resource_budget && trajectory.stats.resource > *criterion.resource_budget) {
    return Verdict{false, "resource", "resource total exceeds the budget"};
  }
  if (criterion.time_budget && from > *criterion.time_budget) {
    return Verdict{false, "time", "last support state reached after the time budget"};
  }
  return Verdict{};
}

std::vector<RankedReport> compare(std::span<const ScenarioReport> reports) {
  for (const auto& r : reports) {
    if (r.model != reports.front().model) {
      throw Error(ErrorCode::model_mismatch, "reports " + reports.front().scenario + " and " + r.scenario +
                                                 " reference different models");
    }
  }
  constexpr Tick kNever = std::numeric_limits<Tick>::max();
  auto goal = [&](const ScenarioReport& r) { return r.max_goal_time().value_or(kNever); };
  auto dominates = [&](const ScenarioReport& a, const ScenarioReport& b) {
    const bool no_worse = a.complete >= b.complete && a.resource_total <= b.resource_total && goal(a) <= goal(b);
    const bool better = a.complete > b.complete || a.resource_total < b.resource_total || goal(a) < goal(b);
    return no_worse && better;
  };

  std::vector<std::size_t> remaining(reports.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  std::vector<RankedReport> out;
  for (int layer = 0; !remaining.empty(); ++layer) {
    std::vector<std::size_t> front;
    std::vector<std::size_t> rest;
    for (auto i : remaining) {
      const bool dominated =
          std::any_of(remaining.begin(), remaining.end(), [&](std::size_t j) { return dominates(reports[j], reports[i]); });
      (dominated ? rest : front).push_back(i);
    }
    std::sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = reports[a];
      const auto& y = reports[b];
      return std::make_tuple(!x.complete, goal(x), x.resource_total, x.omitted_ratio, x.scenario, a) <
             std::make_tuple(!y.complete, goal(y), y.resource_total, y.omitted_ratio, y.scenario, b);
    });
    for (auto i : front) out.push_back(RankedReport{reports[i].scenario, layer});
    remaining = std::move(rest);
  }
  return out;
}

}  // namespace hsgd
