#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hsgd/planner.hpp"

namespace hsgd::testing {

struct RuleBase {
  std::vector<StateId> states;  // rank = index
  std::vector<TransitionRule> rules;
};

// 2..max_states states, 1..max_rules rules, all going up in rank; small
// integer resources so ties occur.
RuleBase random_rule_base(std::mt19937_64& rng, int max_states = 8, int max_rules = 20);

// Every simple chain start -> goal that respects guards and budgets,
// filtered to its Pareto set by pairwise comparison. Each entry is the
// rule-id sequence with its totals.
struct OraclePlan {
  std::vector<std::string> ids;
  double resource = 0.0;
  Tick time = 0;
  auto operator<=>(const OraclePlan&) const = default;
};
std::vector<OraclePlan> pareto_by_exhaustion(const std::vector<TransitionRule>& rules, const StateId& start,
                                             const StateId& goal, const Budgets& budgets = {});

// Diagram over the plan's states and its guarded states, ranked as in
// `ranked`; one arc and one symbol per rule of the plan, population 1.
HsgdModel chain_model(const Plan& plan, Tick horizon, const std::vector<StateId>& ranked);

}  // namespace hsgd::testing
