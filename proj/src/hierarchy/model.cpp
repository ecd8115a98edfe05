#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "hsgd/hierarchy.hpp"

namespace hsgd {

namespace {

const char* kind_name(ArcKind k) { return k == ArcKind::forward ? "forward" : "backstep"; }

// Depth of the forest (1 for a lone diagram), or nullopt when the topology is
// not a forest over the declared diagrams.
std::optional<int> forest_depth(const HsgdModel& model, ValidationReport& report) {
  std::map<DiagramId, DiagramId> parent;
  std::set<DiagramId> parents_seen;
  bool ok = true;
  for (const auto& edge : model.topology) {
    if (model.diagrams.count(edge.parent) == 0) {
      report.add("topology.unknown", "topology refers to unknown diagram " + edge.parent, {edge.parent});
      ok = false;
    }
    if (!parents_seen.insert(edge.parent).second) {
      report.add("topology.duplicate", "diagram " + edge.parent + " declared as parent more than once",
                 {edge.parent});
      ok = false;
    }
    if (edge.children.empty()) {
      report.add("topology.empty", "parent " + edge.parent + " declares no children", {edge.parent});
      ok = false;
    }
    for (const auto& child : edge.children) {
      if (model.diagrams.count(child) == 0) {
        report.add("topology.unknown", "topology refers to unknown diagram " + child, {child});
        ok = false;
      }
      auto [it, inserted] = parent.emplace(child, edge.parent);
      if (!inserted || child == edge.parent) {
        report.add("topology.forest", "topology not a forest: " + child + " has more than one parent", {child});
        ok = false;
      }
    }
  }
  if (!ok) return std::nullopt;

  int depth = 1;
  for (const auto& [id, _] : model.diagrams) {
    int d = 1;
    std::set<DiagramId> path{id};
    DiagramId cur = id;
    for (auto it = parent.find(cur); it != parent.end(); it = parent.find(cur)) {
      cur = it->second;
      if (!path.insert(cur).second) {
        report.add("topology.forest", "topology not a forest: cycle through " + id, {id});
        return std::nullopt;
      }
      ++d;
    }
    depth = std::max(depth, d);
  }
  return depth;
}

}  // namespace

const CanonicalDiagram* HsgdModel::find_diagram(const DiagramId& id) const {
  auto it = diagrams.find(id);
  return it == diagrams.end() ? nullptr : &it->second;
}

const Arc* HsgdModel::find_arc(const ArcRef& ref) const {
  const auto* d = find_diagram(ref.diagram);
  return d == nullptr ? nullptr : d->find_arc(ref.arc);
}

const ControlSymbol* HsgdModel::find_symbol(const std::string& id) const {
  for (const auto& s : rule.symbols) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::vector<DiagramId> HsgdModel::children_of(const DiagramId& parent) const {
  for (const auto& e : topology) {
    if (e.parent == parent) return e.children;
  }
  return {};
}

std::optional<DiagramId> HsgdModel::parent_of(const DiagramId& child) const {
  for (const auto& e : topology) {
    if (std::find(e.children.begin(), e.children.end(), child) != e.children.end()) return e.parent;
  }
  return std::nullopt;
}

std::vector<ArcRef> HsgdModel::coupled_arcs() const {
  std::set<ArcRef> out;
  for (const auto& c : couplings) {
    out.insert(c.parent);
    out.insert(c.children.begin(), c.children.end());
  }
  return {out.begin(), out.end()};
}

std::vector<ArcRef> HsgdModel::isolated_arcs() const {
  const auto coupled = coupled_arcs();
  std::vector<ArcRef> out;
  for (const auto& [id, d] : diagrams) {
    for (const auto& a : d.arcs) {
      ArcRef ref{id, a.id};
      if (a.kind == ArcKind::forward && !std::binary_search(coupled.begin(), coupled.end(), ref)) {
        out.push_back(ref);
      }
    }
  }
  return out;
}

ValidationReport validate_coupling(const HsgdModel& model) {
  ValidationReport report;
  std::set<ArcRef> parents;

  for (const auto& c : model.couplings) {
    const std::string name = c.parent.str();
    const Arc* parent_arc = model.find_arc(c.parent);
    if (parent_arc == nullptr) {
      report.add("coupling.parent", "coupling parent arc " + name + " does not exist", {name});
      continue;
    }
    if (parent_arc->kind != ArcKind::forward) {
      report.add("coupling.parent", "coupling parent arc " + name + " is a " + kind_name(parent_arc->kind) + " arc",
                 {name});
    }
    if (!parents.insert(c.parent).second) {
      report.add("coupling.duplicate", "arc " + name + " is the parent of more than one coupling", {name});
    }
    if (c.children.empty()) {
      report.add("coupling.children", "coupling " + name + " has no child arcs", {name});
      continue;
    }
    if (c.effective_quorum() < 1 || c.effective_quorum() > static_cast<int>(c.children.size())) {
      report.add("coupling.quorum",
                 "quorum " + std::to_string(c.effective_quorum()) + " of " + name + " outside 1.." +
                     std::to_string(c.children.size()),
                 {name});
    }

    const auto topo_children = model.children_of(c.parent.diagram);
    std::set<DiagramId> child_diagrams;
    bool children_ok = true;
    for (const auto& ch : c.children) {
      const Arc* a = model.find_arc(ch);
      if (a == nullptr) {
        report.add("coupling.child", "child arc " + ch.str() + " of " + name + " does not exist", {name, ch.str()});
        children_ok = false;
        continue;
      }
      if (a->kind != ArcKind::forward) {
        report.add("coupling.child", "child arc " + ch.str() + " of " + name + " is a backstep arc",
                   {name, ch.str()});
        children_ok = false;
      }
      if (!child_diagrams.insert(ch.diagram).second) {
        report.add("coupling.child", "coupling " + name + " uses two arcs of " + ch.diagram, {name, ch.diagram});
        children_ok = false;
      }
      if (std::find(topo_children.begin(), topo_children.end(), ch.diagram) == topo_children.end()) {
        report.add("coupling.topology", ch.diagram + " is not a child of " + c.parent.diagram, {name, ch.diagram});
        children_ok = false;
      }
    }
    if (!children_ok) continue;

    auto map_it = model.aggregation.find(c.parent.diagram);
    if (map_it == model.aggregation.end()) {
      report.add("coupling.no_map", "no aggregation map for " + c.parent.diagram + " to check " + name, {name});
      continue;
    }
    const AggregationMap& map = map_it->second;

    // Firing all child arcs from any combo holding their sources must leave
    // the source block of the parent arc for its target block.
    std::vector<std::vector<StateId>> before_axes;
    std::vector<std::optional<StateId>> after_fixed;
    for (const auto& child_id : map.children) {
      auto hit = std::find_if(c.children.begin(), c.children.end(),
                              [&](const ArcRef& r) { return r.diagram == child_id; });
      if (hit != c.children.end()) {
        const Arc* a = model.find_arc(*hit);
        before_axes.push_back({a->source});
        after_fixed.push_back(a->target);
      } else {
        const auto* d = model.find_diagram(child_id);
        before_axes.push_back(d != nullptr ? d->states_by_rank() : std::vector<StateId>{});
        after_fixed.push_back(std::nullopt);
      }
    }

    std::optional<std::string> failure;
    std::vector<std::size_t> idx(before_axes.size(), 0);
    bool done = std::any_of(before_axes.begin(), before_axes.end(), [](const auto& a) { return a.empty(); });
    bool any_checked = false;
    while (!done && !failure) {
      Combo before(before_axes.size());
      Combo after(before_axes.size());
      for (std::size_t i = 0; i < before_axes.size(); ++i) {
        before[i] = before_axes[i][idx[i]];
        after[i] = after_fixed[i].value_or(before[i]);
      }
      const auto pb = map.parent_of(before);
      const auto pa = map.parent_of(after);
      if (pb && pa) {
        any_checked = true;
        if (*pb == *pa) {
          failure = "coupling does not cross blocks: " + name + " keeps the combo inside the " + *pb + " block";
        } else if (*pb != parent_arc->source || *pa != parent_arc->target) {
          failure = "coupling " + name + " moves " + *pb + " -> " + *pa + " but the parent arc is " +
                    parent_arc->source + " -> " + parent_arc->target;
        }
      }
      std::size_t k = idx.size();
      while (true) {
        if (k == 0) {
          done = true;
          break;
        }
        --k;
        if (++idx[k] < before_axes[k].size()) break;
        idx[k] = 0;
      }
    }
    if (failure) {
      report.add(failure->starts_with("coupling does not") ? "coupling.no_cross" : "coupling.block_mismatch",
                 *failure, {name});
    } else if (!any_checked) {
      report.add("coupling.block_mismatch", "coupling " + name + " starts from no combo covered by the map", {name});
    }
  }

  std::set<std::string> symbol_ids;
  std::map<ArcRef, std::string> arc_owner;
  for (const auto& s : model.rule.symbols) {
    if (!symbol_ids.insert(s.id).second) {
      report.add("symbol.duplicate", "duplicate symbol " + s.id, {s.id});
    }
    const Arc* a = model.find_arc(s.arc);
    if (a == nullptr) {
      report.add("symbol.arc", "symbol " + s.id + " addresses unknown arc " + s.arc.str(), {s.id});
      continue;
    }
    if (a->kind != ArcKind::forward) {
      report.add("symbol.arc", "symbol " + s.id + " addresses backstep arc " + s.arc.str(), {s.id});
    }
    if (auto [it, inserted] = arc_owner.emplace(s.arc, s.id); !inserted) {
      report.add("symbol.shared_arc", "symbols " + it->second + " and " + s.id + " address the same arc " + s.arc.str(),
                 {it->second, s.id});
    }
    if (!(s.cost >= 0.0)) {
      report.add("symbol.cost", "symbol " + s.id + " has negative cost", {s.id});
    }
    const bool is_parent = parents.count(s.arc) != 0;
    if (s.symbol_class == SymbolClass::general && !is_parent) {
      report.add("symbol.class",
                 "symbol class mismatch: general symbol " + s.id + " addresses isolated arc " + s.arc.str(), {s.id});
    } else if (s.symbol_class == SymbolClass::individual && is_parent) {
      report.add("symbol.class",
                 "symbol class mismatch: individual symbol " + s.id + " addresses coupling parent " + s.arc.str(),
                 {s.id});
    }
  }
  return report;
}

ValidationReport validate_model(const HsgdModel& model) {
  ValidationReport report;
  for (const auto& [id, d] : model.diagrams) {
    const auto r = validate_canonical(d);
    for (auto issue : r.issues) {
      issue.message = "diagram " + id + ": " + issue.message;
      issue.subjects.insert(issue.subjects.begin(), id);
      report.issues.push_back(std::move(issue));
    }
  }
  forest_depth(model, report);

  for (const auto& edge : model.topology) {
    auto it = model.aggregation.find(edge.parent);
    if (it == model.aggregation.end()) {
      report.add("aggregation.missing", "missing aggregation map for non-leaf diagram " + edge.parent, {edge.parent});
      continue;
    }
    const auto& map = it->second;
    std::set<DiagramId> declared(edge.children.begin(), edge.children.end());
    std::set<DiagramId> mapped(map.children.begin(), map.children.end());
    if (declared != mapped || mapped.size() != map.children.size()) {
      report.add("aggregation.children", "aggregation map of " + edge.parent + " does not list its topology children",
                 {edge.parent});
      continue;
    }
    const auto* parent = model.find_diagram(edge.parent);
    std::vector<const CanonicalDiagram*> children;
    for (const auto& c : map.children) {
      if (const auto* d = model.find_diagram(c)) children.push_back(d);
    }
    if (parent == nullptr || children.size() != map.children.size()) continue;
    report.merge(validate_aggregation(children, map, *parent));
  }
  for (const auto& [parent, map] : model.aggregation) {
    if (map.parent != parent) {
      report.add("aggregation.parent", "aggregation map keyed " + parent + " names parent " + map.parent, {parent});
    }
    if (model.children_of(parent).empty()) {
      report.add("aggregation.leaf", "aggregation map given for leaf or unknown diagram " + parent, {parent});
    }
  }
  report.merge(validate_coupling(model));
  return report;
}

HsgdModel assemble(std::vector<CanonicalDiagram> diagrams, std::vector<TopologyEdge> topology,
                   std::vector<AggregationMap> maps, std::vector<CoupledArc> couplings, InterLevelRule rule) {
  HsgdModel model;
  ValidationReport report;
  for (auto& d : diagrams) {
    const DiagramId id = d.id;
    if (!model.diagrams.emplace(id, std::move(d)).second) {
      report.add("model.duplicate_diagram", "diagram " + id + " declared more than once", {id});
    }
  }
  if (model.diagrams.empty()) {
    report.add("model.empty", "model declares no diagrams");
  }
  model.topology = std::move(topology);
  for (auto& m : maps) {
    const DiagramId parent = m.parent;
    if (!model.aggregation.emplace(parent, std::move(m)).second) {
      report.add("aggregation.duplicate", "more than one aggregation map for " + parent, {parent});
    }
  }
  model.couplings = std::move(couplings);
  model.rule = std::move(rule);

  report.merge(validate_model(model));
  ValidationReport scratch;
  model.levels = forest_depth(model, scratch).value_or(1);
  if (!report.ok()) {
    throw AssemblyRejected(std::move(report));
  }
  return model;
}

}  // namespace hsgd
