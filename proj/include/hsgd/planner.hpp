#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsgd/core.hpp"
#include "hsgd/engine.hpp"
#include "hsgd/hierarchy.hpp"
#include "hsgd/validation.hpp"

namespace hsgd {

// IF the object is in `from` and `control` enters THEN it moves to `to`,
// spending `resource` over `duration` ticks, never backstepping into
// `forbidden_backstep` afterwards.
struct TransitionRule {
  std::string id;
  StateId from;
  StateId to;
  std::optional<StateId> forbidden_backstep;
  std::string control;
  double resource = 0.0;
  Tick duration = 1;

  bool operator==(const TransitionRule&) const = default;
};

// Unknown states, rank violations, duplicate (from, to, control) triples,
// nonpositive durations, negative resources. When `symbols` is non-empty the
// control must name a symbol whose arc joins from -> to with θ = duration.
ValidationReport validate_rules(std::span<const TransitionRule> rules, const CanonicalDiagram& diagram,
                                std::span<const ControlSymbol> symbols = {});

struct Plan {
  std::vector<TransitionRule> rules;
  double total_resource = 0.0;
  Tick total_time = 0;
  std::vector<StateId> states;  // start, then each rule's target

  std::vector<std::string> rule_ids() const;
  bool operator==(const Plan&) const = default;
};

struct Budgets {
  std::optional<double> resource;
  std::optional<Tick> time;

  bool operator==(const Budgets&) const = default;
};

// Pareto-nondominated chains start -> goal over (resource, time), ordered by
// rule-id sequence. Throws NoPlanExists when start or goal is named by no
// rule; an infeasible query returns an empty set.
std::vector<Plan> enumerate_plans(std::span<const TransitionRule> rules, const StateId& start, const StateId& goal,
                                  const Budgets& budgets = {});

// Rule k's control at start_tick + Σ durations of the rules before it.
TimeDiagram plan_to_time_diagram(const Plan& plan, Tick start_tick);

// ϑ plus backstep guards: each rule's forbidden state is guarded from the
// tick the rule fires until the plan ends.
ControlScenario plan_to_scenario(const Plan& plan, const DiagramId& diagram, Tick start_tick, std::string id);

enum class LinkRule { all_children, any_child, k_of_n };

struct ObjectiveNode {
  std::string id;
  std::optional<StateRef> goal;  // leaves
  LinkRule rule = LinkRule::all_children;
  int k = 0;  // k_of_n only
  std::vector<std::string> children;

  bool operator==(const ObjectiveNode&) const = default;
};

struct ObjectivesTree {
  std::string root;
  std::vector<ObjectiveNode> nodes;

  const ObjectiveNode* find(const std::string& id) const;
  bool operator==(const ObjectivesTree&) const = default;
};

ValidationReport validate_objectives(const ObjectivesTree& tree, const HsgdModel& model);

struct ObjectivesReport {
  std::map<std::string, bool> achieved;
  std::vector<std::string> unmet_leaves;
  bool root_achieved = false;
};

// A leaf is achieved when its goal state holds the whole population at the
// trajectory's last tick. Throws UnknownGoalState.
ObjectivesReport check_objectives(const ObjectivesTree& tree, const HsgdModel& model, const Trajectory& trajectory);

enum class TransformKind { add_state, remove_state, add_arc, modify_arc, remove_arc };

struct StructureTransform {
  std::string name;
  TransformKind kind = TransformKind::add_arc;
  StateNode state;    // add_state
  Arc arc;            // add_arc, modify_arc (matched by id)
  std::string target; // remove_state / remove_arc

  bool operator==(const StructureTransform&) const = default;
};

// Throws TransformBreaksOrder when the rewrite violates rank discipline or
// removes a role state.
CanonicalDiagram apply_transform(CanonicalDiagram diagram, const StructureTransform& transform);

struct CanonicalTemplate {
  CanonicalDiagram structure;                 // Str
  std::string behavior;                       // T
  std::vector<std::string> inputs;            // X
  std::vector<std::string> outputs;           // Y
  std::vector<std::string> controls;          // U
  // Iv keys: population, transit.<arc>, dwell.<state>, mu0.<state>.
  std::map<std::string, double> initial_values;
  std::vector<StructureTransform> transforms;  // Tr

  bool operator==(const CanonicalTemplate&) const = default;
};

struct Instantiated {
  CanonicalDiagram diagram;
  ValidationReport report;
};

// Applies the named transforms, then Iv, then the overrides, and validates.
// Throws InvalidOverride for undeclared keys, bad values or unknown
// transform names.
Instantiated instantiate_template(const CanonicalTemplate& tmpl, const std::map<std::string, double>& overrides = {},
                                  std::span<const std::string> transforms = {});

}  // namespace hsgd
