#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsgd/core.hpp"
#include "hsgd/error.hpp"
#include "hsgd/validation.hpp"

namespace hsgd {

struct ArcRef {
  DiagramId diagram;
  ArcId arc;

  std::string str() const { return diagram + "." + arc; }
  auto operator<=>(const ArcRef&) const = default;
};

struct StateRef {
  DiagramId diagram;
  StateId state;

  std::string str() const { return diagram + "." + state; }
  auto operator<=>(const StateRef&) const = default;
};

// ---------------------------------------------------------------------------
// Composition

// d1 followed by d2 on a shifted timeline, gluing d1's final state to d2's
// initial state. Requires α1 < α2 and disjoint ids apart from the glued pair.
CanonicalDiagram compose_sequential(const CanonicalDiagram& d1, const CanonicalDiagram& d2);

struct CompositeState {
  StateId first;
  StateId second;
  int first_rank = 0;
  int second_rank = 0;

  std::string id() const { return "(" + first + "," + second + ")"; }
  bool operator==(const CompositeState&) const = default;
};

// Pair-state view of two diagrams running on a shared clock.
struct CompositeDiagram {
  DiagramId first_id;
  DiagramId second_id;
  TimePartition partition;  // common refinement
  std::vector<CompositeState> states;
  CompositeState initial;
  CompositeState final_state;
  // Boundary index in the refined partition -> distribution over pair ids.
  std::map<int, std::map<std::string, double>> mu;

  // Componentwise order on ranks.
  static bool precedes(const CompositeState& a, const CompositeState& b) {
    return a.first_rank <= b.first_rank && a.second_rank <= b.second_rank;
  }
};

// Requires α1 = α2.
CompositeDiagram compose_parallel(const CanonicalDiagram& d1, const CanonicalDiagram& d2);

// ---------------------------------------------------------------------------
// Aggregation and couplings

using Combo = std::vector<StateId>;  // one state per child, in child order

struct AggregationBlock {
  StateId parent_state;
  std::vector<Combo> combos;

  bool operator==(const AggregationBlock&) const = default;
};

struct AggregationMap {
  DiagramId parent;
  std::vector<DiagramId> children;
  std::vector<AggregationBlock> blocks;

  // Parent state of a combo, if some block holds it.
  std::optional<StateId> parent_of(const Combo& combo) const;
  bool operator==(const AggregationMap&) const = default;
};

// Disjoint blocks, coverage of every forward-reachable combo, and
// order-monotonicity (with a witness pair when violated).
ValidationReport validate_aggregation(const std::vector<const CanonicalDiagram*>& children,
                                      const AggregationMap& map, const CanonicalDiagram& parent);

struct CoupledArc {
  ArcRef parent;
  std::vector<ArcRef> children;
  std::optional<int> quorum;  // unset: all children

  int effective_quorum() const { return quorum.value_or(static_cast<int>(children.size())); }
  bool operator==(const CoupledArc&) const = default;
};

enum class SymbolClass { individual, general };

struct ControlSymbol {
  std::string id;
  SymbolClass symbol_class = SymbolClass::individual;
  ArcRef arc;
  double cost = 0.0;

  bool operator==(const ControlSymbol&) const = default;
};

// Symbols and their individual/general split. Isolated and coupled arcs
// are derived from the declared couplings.
struct InterLevelRule {
  std::vector<ControlSymbol> symbols;

  bool operator==(const InterLevelRule&) const = default;
};

struct TopologyEdge {
  DiagramId parent;
  std::vector<DiagramId> children;

  bool operator==(const TopologyEdge&) const = default;
};

struct HsgdModel {
  std::map<DiagramId, CanonicalDiagram> diagrams;
  std::vector<TopologyEdge> topology;
  std::map<DiagramId, AggregationMap> aggregation;  // keyed by parent
  std::vector<CoupledArc> couplings;
  InterLevelRule rule;
  int levels = 1;

  const CanonicalDiagram* find_diagram(const DiagramId& id) const;
  const Arc* find_arc(const ArcRef& ref) const;
  const ControlSymbol* find_symbol(const std::string& id) const;
  std::vector<DiagramId> children_of(const DiagramId& parent) const;
  std::optional<DiagramId> parent_of(const DiagramId& child) const;

  // Forward arcs that serve as a coupling parent or constituent.
  std::vector<ArcRef> coupled_arcs() const;
  std::vector<ArcRef> isolated_arcs() const;

  bool operator==(const HsgdModel&) const = default;
};

ValidationReport validate_coupling(const HsgdModel& model);

// Every check that assemble() runs, without throwing.
ValidationReport validate_model(const HsgdModel& model);

class AssemblyRejected : public Error {
 public:
  explicit AssemblyRejected(ValidationReport report)
      : Error(ErrorCode::assembly_rejected, format_report(report)), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

// Builds the model and throws AssemblyRejected with the combined report
// unless every diagram, aggregation map, and coupling validates.
HsgdModel assemble(std::vector<CanonicalDiagram> diagrams, std::vector<TopologyEdge> topology,
                   std::vector<AggregationMap> maps, std::vector<CoupledArc> couplings, InterLevelRule rule);

}  // namespace hsgd
