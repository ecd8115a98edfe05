#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsgd/core.hpp"
#include "hsgd/hierarchy.hpp"
#include "hsgd/validation.hpp"

namespace hsgd {

using SymbolSet = std::set<std::string>;
// ϑ: tick -> symbols entered at that tick.
using TimeDiagram = std::map<Tick, SymbolSet>;

struct CriterionConfig {
  double rank_weight = 1.0;      // a
  double resource_weight = 0.0;  // b
  double time_weight = 0.0;

  bool operator==(const CriterionConfig&) const = default;
};

// Backsteps into `state` are disabled for ticks in [from, until].
struct BackstepGuard {
  StateRef state;
  Tick from = 0;
  Tick until = 0;

  bool operator==(const BackstepGuard&) const = default;
};

struct ControlScenario {
  std::string id;
  std::string model;  // reference carried into trajectories and reports
  TimeDiagram schedule;
  Tick horizon = 0;
  int priority = 0;
  CriterionConfig criterion;
  std::vector<BackstepGuard> guards;

  bool operator==(const ControlScenario&) const = default;
};

// Unknown symbols, ticks outside [0, horizon], negative priority, horizon
// beyond the longest diagram, guards on unknown states.
ValidationReport validate_scenario(const HsgdModel& model, const ControlScenario& scenario);

enum class EventKind {
  individual,  // individual symbol fired its arc
  general,     // general symbol fired a coupling parent
  cascade,     // child arc fired by a general symbol
  upward,      // coupling parent fired by quorum
  suppressed,  // quorum met after a general symbol already fired the parent
  backstep,    // dwell limit reached
  arrival,     // objects completed an arc
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

// Departure events (individual, general, cascade, upward, backstep) move
// `objects` off the arc's source after the snapshot at `tick`; they arrive
// at `arrival`. An empty object list is a vacuous application.
struct Event {
  Tick tick = 0;
  EventKind kind = EventKind::arrival;
  DiagramId diagram;
  ArcId arc;
  std::string symbol;
  std::vector<std::int32_t> objects;
  Tick arrival = 0;

  bool departs() const noexcept { return kind != EventKind::arrival && kind != EventKind::suppressed; }
  bool operator==(const Event&) const = default;
};

struct ScenarioStats {
  Count forward_completions = 0;
  Count coupled_completions = 0;
  Count backsteps = 0;
  Count omitted_backsteps = 0;
  Count redundancy = 0;
  double resource = 0.0;

  bool operator==(const ScenarioStats&) const = default;
};

struct ObjectState {
  StateId state;  // last settled state
  ArcId arc;      // non-empty while in transit
  Tick arrival = 0;
  Tick entry = 0;
  std::set<StateId> reached;  // states entered by a forward completion

  bool in_transit() const noexcept { return !arc.empty(); }
  bool operator==(const ObjectState&) const = default;
};

struct SimState {
  Tick tick = 0;  // next tick to process
  Tick horizon = 0;
  std::map<DiagramId, std::vector<ObjectState>> objects;
  std::map<ArcRef, Tick> last_completion;
  // (coupling index, parent interval) bookkeeping.
  std::set<std::pair<std::size_t, int>> general_fired;
  std::set<std::pair<std::size_t, int>> quorum_met;
  std::set<std::pair<std::size_t, int>> redundant;
  std::vector<BackstepGuard> guards;
  ScenarioStats stats;

  bool operator==(const SimState&) const = default;
};

SimState initial_state(const HsgdModel& model, Tick horizon, std::vector<BackstepGuard> guards = {});

struct StepResult {
  SimState state;
  std::vector<Event> events;
  std::map<DiagramId, std::map<StateId, Count>> snapshot;
  std::map<DiagramId, Count> in_transit;
};

// Processes one tick: arrivals, snapshot, general symbols (with cascade),
// individual symbols, upward propagation, dwell-limit backsteps. At the
// horizon only arrivals and the snapshot happen.
// Throws UnknownSymbol and InconsistentState.
StepResult step(const HsgdModel& model, SimState state, Tick tick, const SymbolSet& symbols);

struct DiagramTrace {
  DiagramId diagram;
  TimePartition partition;
  std::vector<StateId> states;  // by rank
  std::vector<Arc> arcs;
  StateId initial;
  StateId final_state;
  Count population = 0;
  std::map<int, Distribution> mu;
  std::map<StateId, Count> initial_counts;
  ActualDynamics dynamics;
  std::vector<SymbolSet> applied;        // u, per tick
  std::vector<double> cumulative_cost;   // per tick

  bool operator==(const DiagramTrace&) const = default;
};

struct Trajectory {
  std::string scenario;
  std::string model;
  Tick horizon = 0;
  std::map<DiagramId, DiagramTrace> diagrams;
  std::vector<Event> events;
  std::vector<CoupledArc> couplings;
  ScenarioStats stats;

  bool operator==(const Trajectory&) const = default;
};

// Throws PreconditionViolated for an invalid scenario, plus step errors.
Trajectory run(const HsgdModel& model, const ControlScenario& scenario);
Trajectory run_inertial(const HsgdModel& model, Tick horizon);

// Occupancy, in-transit and counter series rebuilt from the event log and
// the initial counts alone.
std::map<DiagramId, ActualDynamics> replay(const Trajectory& trajectory);

struct ScenarioReport {
  std::string scenario;
  std::string model;
  bool complete = false;
  Count redundancy_count = 0;
  double omitted_ratio = 0.0;
  double complexness = 0.0;
  // First tick at which S* holds the whole population; nullopt if never.
  std::map<DiagramId, std::optional<Tick>> goal_times;
  double resource_total = 0.0;
  // L1 distance between prescribed μi and the observed distribution at τi.
  std::map<DiagramId, std::map<int, double>> divergence;
  int priority = 0;
  double quality = 0.0;

  // Largest goal time; nullopt when some diagram never reached its goal.
  std::optional<Tick> max_goal_time() const;
  bool operator==(const ScenarioReport&) const = default;
};

// Throws TrajectoryModelMismatch when the trajectory was not produced from
// this scenario.
ScenarioReport evaluate(const Trajectory& trajectory, const ControlScenario& scenario);

struct EfficiencyVectors {
  std::map<DiagramId, std::vector<SymbolSet>> u;
  std::map<DiagramId, std::vector<StateId>> s;
  std::map<DiagramId, std::vector<double>> w;
};

// s = modal state (ties to lower rank; held while every object is in
// transit); w = a·ordinal(s)/ordinal(S*) − b·cost.
EfficiencyVectors efficiency_vectors(const Trajectory& trajectory, const CriterionConfig& cfg);

struct SupportState {
  StateRef state;  // empty diagram: the unique diagram declaring the state
  Tick deadline = 0;

  bool operator==(const SupportState&) const = default;
};

struct PartialCriterion {
  std::vector<SupportState> supports;
  std::optional<double> resource_budget;
  std::optional<Tick> time_budget;

  bool operator==(const PartialCriterion&) const = default;
};

struct Verdict {
  bool confirmed = true;
  std::string failed;  // support state or budget name
  std::string reason;
};

// Throws UnknownSupportState.
Verdict check_partial(const Trajectory& trajectory, const PartialCriterion& criterion);

struct RankedReport {
  std::string scenario;
  int layer = 0;  // Pareto layer, 0 = frontier
  bool operator==(const RankedReport&) const = default;
};

// Throws ModelMismatch when the reports reference different models.
std::vector<RankedReport> compare(std::span<const ScenarioReport> reports);

}  // namespace hsgd
