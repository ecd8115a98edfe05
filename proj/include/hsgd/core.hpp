#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsgd/validation.hpp"

namespace hsgd {

using Tick = std::int64_t;
using Count = std::int64_t;
using StateId = std::string;
using ArcId = std::string;
using DiagramId = std::string;

// Boundaries τ0 < τ1 < ... < τn with τ0 = 0. Interval j (1-based) is (τj-1, τj];
// tick 0 is attributed to the first interval.
struct TimePartition {
  std::vector<Tick> boundaries{0};

  std::size_t interval_count() const noexcept {
    return boundaries.empty() ? 0 : boundaries.size() - 1;
  }
  Tick horizon() const noexcept { return boundaries.empty() ? 0 : boundaries.back(); }

  // 1..n for ticks inside the horizon, n + 1 for ticks past it.
  int interval_of(Tick tick) const;

  ValidationReport validate() const;

  bool operator==(const TimePartition&) const = default;
};

enum class StateRole { initial, intermediate, final };

struct StateNode {
  StateId id;
  int rank = 0;
  // Index j of the interval group S^Δj the state belongs to; unset when the
  // diagram does not group states by interval.
  std::optional<int> level_interval;
  // Objects that dwell this many ticks without being driven forward take a
  // backstep arc. Unset means they wait indefinitely.
  std::optional<Tick> dwell_limit;

  bool operator==(const StateNode&) const = default;
};

enum class ArcKind { forward, backstep };

struct Arc {
  ArcId id;
  StateId source;
  StateId target;
  ArcKind kind = ArcKind::forward;
  Tick transit = 1;

  bool operator==(const Arc&) const = default;
};

// Fraction of the population per state.
using Distribution = std::map<StateId, double>;

double total_mass(const Distribution& d);

struct CanonicalDiagram {
  DiagramId id;
  TimePartition partition;
  std::vector<StateNode> states;
  std::vector<Arc> arcs;
  // Boundary index -> prescribed distribution. μ0 defaults to all mass on the
  // initial state when absent.
  std::map<int, Distribution> mu;
  Count population = 1;
  StateId initial;
  StateId final_state;

  const StateNode* find_state(const StateId& state) const;
  const Arc* find_arc(const ArcId& arc) const;
  StateRole role(const StateId& state) const;

  // States sorted by ascending rank (ties by id).
  std::vector<StateId> states_by_rank() const;
  // Position of the state in states_by_rank(), or -1.
  int ordinal(const StateId& state) const;

  Distribution initial_distribution() const;
  // Object counts per state realizing μ0 for this population.
  std::map<StateId, Count> initial_counts() const;

  bool operator==(const CanonicalDiagram&) const = default;
};

// Lists every violated structural invariant; never throws.
ValidationReport validate_canonical(const CanonicalDiagram& diagram);

// States reachable from the initial state using forward arcs only.
std::vector<StateId> forward_reachable(const CanonicalDiagram& diagram);

// Expands `d` so that every state of the diagram has an entry (missing = 0).
Distribution over_states(const CanonicalDiagram& diagram, const Distribution& d);

// Converts fractions to counts: round half up, then settle the residual on the
// largest remainders (ties to lower rank) so the counts sum to `population`.
std::map<StateId, Count> to_counts(const CanonicalDiagram& diagram, const Distribution& d,
                                   Count population);

// Per-tick series, index = tick. Snapshot t is taken after the arrivals due at
// t and before the departures issued at t.
struct ActualDynamics {
  DiagramId diagram;
  Count population = 0;
  std::map<ArcId, std::vector<Count>> eta;
  std::map<StateId, std::vector<Count>> occupancy;
  std::vector<Count> in_transit;

  Tick horizon() const noexcept { return static_cast<Tick>(in_transit.size()) - 1; }

  bool operator==(const ActualDynamics&) const = default;
};

// Dynamics over [0, horizon] with the initial counts held constant and all
// counters at zero.
ActualDynamics make_dynamics(const CanonicalDiagram& diagram, Tick horizon);

// Conservation, counter monotonicity, and nonnegativity at every tick.
ValidationReport check_dynamics(const ActualDynamics& dynamics);

struct PopulationEvent {
  ArcId arc;
  Count count = 0;
  Tick departure = 0;
};

// Moves `count` objects along `arc`, leaving the source after snapshot
// `departure` and arriving at departure + max(θ, 1). Throws
// ErrorCode::insufficient_occupancy when the source cannot supply the objects.
ActualDynamics advance_population(const CanonicalDiagram& diagram, ActualDynamics dynamics,
                                  std::span<const PopulationEvent> events);

// Observed distribution at `tick`; objects in transit are excluded, so the
// result sums to (population - in_transit) / population.
Distribution distribution_at(const ActualDynamics& dynamics, Tick tick);

// L1 distance in [0, 2].
double compare_distributions(const Distribution& expected, const Distribution& observed);

}  // namespace hsgd
