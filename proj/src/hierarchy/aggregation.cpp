#include <algorithm>
#include <map>
#include <set>

#include "hsgd/hierarchy.hpp"

namespace hsgd {

namespace {

std::string combo_str(const Combo& c) {
  std::string out = "(";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i > 0) out += ",";
    out += c[i];
  }
  return out + ")";
}

// Odometer over the Cartesian product, last position fastest.
template <typename F>
void for_each_combo(const std::vector<std::vector<StateId>>& axes, F&& f) {
  if (axes.empty() || std::any_of(axes.begin(), axes.end(), [](const auto& a) { return a.empty(); })) {
    return;
  }
  std::vector<std::size_t> idx(axes.size(), 0);
  Combo combo(axes.size());
  while (true) {
    for (std::size_t i = 0; i < axes.size(); ++i) combo[i] = axes[i][idx[i]];
    f(combo);
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
  }
}

}  // namespace

std::optional<StateId> AggregationMap::parent_of(const Combo& combo) const {
  for (const auto& b : blocks) {
    if (std::find(b.combos.begin(), b.combos.end(), combo) != b.combos.end()) {
      return b.parent_state;
    }
  }
  return std::nullopt;
}

ValidationReport validate_aggregation(const std::vector<const CanonicalDiagram*>& children,
                                      const AggregationMap& map, const CanonicalDiagram& parent) {
  ValidationReport report;
  if (children.size() != map.children.size()) {
    report.add("aggregation.children",
               "aggregation map of " + map.parent + " lists " + std::to_string(map.children.size()) +
                   " children but " + std::to_string(children.size()) + " were supplied",
               {map.parent});
    return report;
  }
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (children[i]->id != map.children[i]) {
      report.add("aggregation.children",
                 "child " + std::to_string(i) + " of the map is " + map.children[i] + ", got " + children[i]->id,
                 {map.children[i]});
    }
  }
  if (!report.ok()) return report;

  std::map<Combo, StateId> owner;
  for (const auto& block : map.blocks) {
    if (parent.find_state(block.parent_state) == nullptr) {
      report.add("aggregation.parent_state",
                 "block maps to unknown parent state " + block.parent_state + " of " + parent.id,
                 {block.parent_state});
    }
    for (const auto& combo : block.combos) {
      bool well_formed = combo.size() == children.size();
      for (std::size_t i = 0; well_formed && i < combo.size(); ++i) {
        well_formed = children[i]->find_state(combo[i]) != nullptr;
      }
      if (!well_formed) {
        report.add("aggregation.combo", "combo " + combo_str(combo) + " does not name one state per child",
                   {combo_str(combo)});
        continue;
      }
      auto [it, inserted] = owner.emplace(combo, block.parent_state);
      if (!inserted) {
        report.add("aggregation.overlap",
                   "blocks not disjoint: combo " + combo_str(combo) + " assigned to both " + it->second + " and " +
                       block.parent_state,
                   {combo_str(combo)});
      }
    }
  }

  std::vector<std::vector<StateId>> axes;
  for (const auto* c : children) {
    auto reach = forward_reachable(*c);
    std::sort(reach.begin(), reach.end(), [&](const StateId& a, const StateId& b) {
      return c->ordinal(a) < c->ordinal(b);
    });
    axes.push_back(std::move(reach));
  }
  for_each_combo(axes, [&](const Combo& combo) {
    if (owner.count(combo) == 0) {
      report.add("aggregation.uncovered", "reachable combo " + combo_str(combo) + " is not covered by any block",
                 {combo_str(combo)});
    }
  });

  // Monotonicity over every covered pair; report the first witness in
  // enumeration order plus the total number of violating pairs.
  std::vector<std::pair<Combo, int>> covered;
  for (const auto& [combo, state] : owner) {
    if (const auto* node = parent.find_state(state)) covered.emplace_back(combo, node->rank);
  }
  auto precedes = [&](const Combo& a, const Combo& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (children[i]->find_state(a[i])->rank > children[i]->find_state(b[i])->rank) return false;
    }
    return true;
  };
  std::size_t violations = 0;
  std::optional<std::pair<Combo, Combo>> witness;
  for (const auto& [a, ra] : covered) {
    for (const auto& [b, rb] : covered) {
      if (a != b && precedes(a, b) && ra > rb) {
        ++violations;
        if (!witness) witness = std::make_pair(a, b);
      }
    }
  }
  if (witness) {
    const auto& [a, b] = *witness;
    report.add("aggregation.monotonicity",
               "order violated: " + combo_str(a) + " <= " + combo_str(b) + " but " + owner.at(a) + " ranks above " +
                   owner.at(b) + " (" + std::to_string(violations) + " violating pairs)",
               {combo_str(a), combo_str(b)});
  }
  return report;
}

}  // namespace hsgd
