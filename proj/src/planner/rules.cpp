#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "hsgd/error.hpp"
#include "hsgd/planner.hpp"

namespace hsgd {

std::vector<std::string> Plan::rule_ids() const {
  std::vector<std::string> ids;
  ids.reserve(rules.size());
  for (const auto& r : rules) ids.push_back(r.id);
  return ids;
}

ValidationReport validate_rules(std::span<const TransitionRule> rules, const CanonicalDiagram& diagram,
                                std::span<const ControlSymbol> symbols) {
  ValidationReport report;
  std::set<std::string> ids;
  std::set<std::tuple<StateId, StateId, std::string>> triples;
  for (const auto& r : rules) {
    if (!ids.insert(r.id).second) report.add("rule.duplicate_id", "duplicate rule id " + r.id, {r.id});
    if (!triples.insert({r.from, r.to, r.control}).second) {
      report.add("rule.duplicate", "duplicate rule " + r.from + " -> " + r.to + " on " + r.control + " (" + r.id + ")",
                 {r.id});
    }
    if (r.duration < 1) report.add("rule.duration", "rule " + r.id + " needs a duration of at least 1 tick", {r.id});
    if (r.resource < 0.0) report.add("rule.resource", "rule " + r.id + " has a negative resource", {r.id});

    const StateNode* from = diagram.find_state(r.from);
    const StateNode* to = diagram.find_state(r.to);
    for (const auto& [node, name] : {std::pair{from, r.from}, std::pair{to, r.to}}) {
      if (node == nullptr) report.add("rule.unknown_state", "rule " + r.id + " refers to unknown state " + name, {r.id, name});
    }
    if (from != nullptr && to != nullptr && from->rank >= to->rank) {
      report.add("rule.rank", "rule " + r.id + " goes against rank: " + r.from + " -> " + r.to, {r.id});
    }
    if (r.forbidden_backstep) {
      const StateNode* sl = diagram.find_state(*r.forbidden_backstep);
      if (sl == nullptr) {
        report.add("rule.unknown_state", "rule " + r.id + " forbids unknown state " + *r.forbidden_backstep,
                   {r.id, *r.forbidden_backstep});
      } else if (to != nullptr && sl->rank >= to->rank) {
        report.add("rule.forbidden_rank",
                   "rule " + r.id + " forbids " + *r.forbidden_backstep + ", which does not rank below " + r.to, {r.id});
      }
    }

    if (symbols.empty()) continue;
    const auto sym = std::find_if(symbols.begin(), symbols.end(), [&](const ControlSymbol& s) { return s.id == r.control; });
    if (sym == symbols.end()) {
      report.add("rule.symbol", "rule " + r.id + " uses unknown symbol " + r.control, {r.id, r.control});
      continue;
    }
    const Arc* arc = sym->arc.diagram == diagram.id ? diagram.find_arc(sym->arc.arc) : nullptr;
    if (arc == nullptr || arc->kind != ArcKind::forward || arc->source != r.from || arc->target != r.to) {
      report.add("rule.symbol_arc",
                 "symbol " + r.control + " of rule " + r.id + " does not drive " + r.from + " -> " + r.to, {r.id});
    } else if (arc->transit != r.duration) {
      report.add("rule.duration_mismatch",
                 "rule " + r.id + " lasts " + std::to_string(r.duration) + " ticks but arc " + arc->id + " takes " +
                     std::to_string(arc->transit),
                 {r.id});
    }
  }
  return report;
}

namespace {

bool dominates(const Plan& a, const Plan& b) {
  return a.total_resource <= b.total_resource && a.total_time <= b.total_time &&
         (a.total_resource < b.total_resource || a.total_time < b.total_time);
}

class Search {
 public:
  Search(std::span<const TransitionRule> rules, StateId goal, Budgets budgets)
      : goal_(std::move(goal)), budgets_(budgets) {
    for (const auto& r : rules) out_[r.from].push_back(&r);
    for (auto& [_, list] : out_) {
      std::sort(list.begin(), list.end(), [](const TransitionRule* a, const TransitionRule* b) { return a->id < b->id; });
    }
  }

  std::vector<Plan> run(const StateId& start) {
    current_.states.push_back(start);
    visited_.insert(start);
    dfs(start);
    std::vector<Plan> front;
    for (const auto& p : found_) {
      if (std::none_of(found_.begin(), found_.end(), [&](const Plan& q) { return dominates(q, p); })) front.push_back(p);
    }
    std::sort(front.begin(), front.end(),
              [](const Plan& a, const Plan& b) { return a.rule_ids() < b.rule_ids(); });
    return front;
  }

 private:
  void dfs(const StateId& at) {
    if (at == goal_) {
      found_.push_back(current_);
      return;
    }
    // Every extension costs at least one more tick, so a found plan that is
    // no worse here dominates everything below.
    for (const auto& q : found_) {
      if (q.total_resource <= current_.total_resource && q.total_time <= current_.total_time) return;
    }
    const auto it = out_.find(at);
    if (it == out_.end()) return;
    for (const TransitionRule* r : it->second) {
      if (visited_.count(r->to) != 0 || forbidden_.count(r->to) != 0) continue;
      if (r->forbidden_backstep == r->to) continue;
      const double resource = current_.total_resource + r->resource;
      const Tick time = current_.total_time + r->duration;
      if (budgets_.resource && resource > *budgets_.resource) continue;
      if (budgets_.time && time > *budgets_.time) continue;

      const double saved_resource = current_.total_resource;
      const Tick saved_time = current_.total_time;
      current_.rules.push_back(*r);
      current_.states.push_back(r->to);
      current_.total_resource = resource;
      current_.total_time = time;
      visited_.insert(r->to);
      if (r->forbidden_backstep) forbidden_.insert(*r->forbidden_backstep);

      dfs(r->to);

      if (r->forbidden_backstep) forbidden_.erase(forbidden_.find(*r->forbidden_backstep));
      visited_.erase(r->to);
      current_.rules.pop_back();
      current_.states.pop_back();
      current_.total_resource = saved_resource;
      current_.total_time = saved_time;
    }
  }

  StateId goal_;
  Budgets budgets_;
  std::map<StateId, std::vector<const TransitionRule*>> out_;
  Plan current_;
  std::set<StateId> visited_;
  std::multiset<StateId> forbidden_;
  std::vector<Plan> found_;
};

}  // namespace

std::vector<Plan> enumerate_plans(std::span<const TransitionRule> rules, const StateId& start, const StateId& goal,
                                  const Budgets& budgets) {
  if (start == goal) return {Plan{{}, 0.0, 0, {start}}};
  auto named = [&](const StateId& s) {
    return std::any_of(rules.begin(), rules.end(), [&](const TransitionRule& r) { return r.from == s || r.to == s; });
  };
  if (!named(start)) throw Error(ErrorCode::no_plan_exists, "start state " + start + " is not named by any rule");
  if (!named(goal)) throw Error(ErrorCode::no_plan_exists, "goal state " + goal + " is not named by any rule");
  for (const auto& r : rules) {
    if (r.duration < 1 || r.resource < 0.0) {
      throw Error(ErrorCode::precondition_violated, "rule " + r.id + " needs a positive duration and nonnegative resource");
    }
  }
  return Search(rules, goal, budgets).run(start);
}

TimeDiagram plan_to_time_diagram(const Plan& plan, Tick start_tick) {
  TimeDiagram out;
  Tick t = start_tick;
  for (const auto& r : plan.rules) {
    out[t].insert(r.control);
    t += r.duration;
  }
  return out;
}

ControlScenario plan_to_scenario(const Plan& plan, const DiagramId& diagram, Tick start_tick, std::string id) {
  ControlScenario sc;
  sc.id = std::move(id);
  sc.schedule = plan_to_time_diagram(plan, start_tick);
  sc.horizon = start_tick + plan.total_time;
  Tick t = start_tick;
  for (const auto& r : plan.rules) {
    if (r.forbidden_backstep) sc.guards.push_back(BackstepGuard{StateRef{diagram, *r.forbidden_backstep}, t, sc.horizon});
    t += r.duration;
  }
  return sc;
}

}  // namespace hsgd
