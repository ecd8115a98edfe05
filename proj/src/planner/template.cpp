#include <algorithm>
#include <cmath>
#include <set>

#include "hsgd/error.hpp"
#include "hsgd/planner.hpp"

namespace hsgd {

namespace {

// Issue codes that express order discipline.
bool order_issue(const Issue& i) {
  return i.code == "arc.order" || i.code == "state.rank_duplicate" || i.code == "state.interval_order" ||
         i.code == "final.outgoing";
}

[[noreturn]] void breaks(const StructureTransform& t, const std::string& why) {
  throw Error(ErrorCode::transform_breaks_order, "transform " + t.name + ": " + why);
}

bool whole(double v) { return std::floor(v) == v; }

}  // namespace

CanonicalDiagram apply_transform(CanonicalDiagram d, const StructureTransform& t) {
  std::vector<Issue> before;
  for (const auto& i : validate_canonical(d).issues) {
    if (order_issue(i)) before.push_back(i);
  }
  auto arc_it = [&](const ArcId& id) {
    return std::find_if(d.arcs.begin(), d.arcs.end(), [&](const Arc& a) { return a.id == id; });
  };

  switch (t.kind) {
    case TransformKind::add_state:
      if (d.find_state(t.state.id) != nullptr) breaks(t, "state " + t.state.id + " already exists");
      d.states.push_back(t.state);
      break;
    case TransformKind::remove_state: {
      if (d.find_state(t.target) == nullptr) breaks(t, "unknown state " + t.target);
      if (t.target == d.initial || t.target == d.final_state) breaks(t, "cannot remove role state " + t.target);
      std::erase_if(d.states, [&](const StateNode& s) { return s.id == t.target; });
      std::erase_if(d.arcs, [&](const Arc& a) { return a.source == t.target || a.target == t.target; });
      for (auto& [_, dist] : d.mu) dist.erase(t.target);
      break;
    }
    case TransformKind::add_arc:
      if (d.find_arc(t.arc.id) != nullptr) breaks(t, "arc " + t.arc.id + " already exists");
      if (d.find_state(t.arc.source) == nullptr || d.find_state(t.arc.target) == nullptr) {
        breaks(t, "arc " + t.arc.id + " joins undeclared states");
      }
      d.arcs.push_back(t.arc);
      break;
    case TransformKind::modify_arc: {
      const auto it = arc_it(t.arc.id);
      if (it == d.arcs.end()) breaks(t, "unknown arc " + t.arc.id);
      if (d.find_state(t.arc.source) == nullptr || d.find_state(t.arc.target) == nullptr) {
        breaks(t, "arc " + t.arc.id + " joins undeclared states");
      }
      *it = t.arc;
      break;
    }
    case TransformKind::remove_arc: {
      const auto it = arc_it(t.target);
      if (it == d.arcs.end()) breaks(t, "unknown arc " + t.target);
      d.arcs.erase(it);
      break;
    }
  }

  for (const auto& i : validate_canonical(d).issues) {
    if (order_issue(i) && std::find(before.begin(), before.end(), i) == before.end()) breaks(t, i.message);
  }
  return d;
}

Instantiated instantiate_template(const CanonicalTemplate& tmpl, const std::map<std::string, double>& overrides,
                                  std::span<const std::string> transforms) {
  for (const auto& [key, _] : overrides) {
    if (tmpl.initial_values.count(key) == 0) {
      throw Error(ErrorCode::invalid_override, "override " + key + " is not a declared initial value");
    }
  }
  CanonicalDiagram d = tmpl.structure;
  for (const auto& name : transforms) {
    const auto it = std::find_if(tmpl.transforms.begin(), tmpl.transforms.end(),
                                 [&](const StructureTransform& t) { return t.name == name; });
    if (it == tmpl.transforms.end()) throw Error(ErrorCode::invalid_override, "unknown transform " + name);
    d = apply_transform(std::move(d), *it);
  }

  auto values = tmpl.initial_values;
  for (const auto& [key, v] : overrides) values[key] = v;

  Distribution mu0;
  bool has_mu0 = false;
  for (const auto& [key, v] : values) {
    const bool overridden = overrides.count(key) != 0;
    auto bad = [&](const std::string& why) {
      throw Error(ErrorCode::invalid_override, "initial value " + key + " = " + std::to_string(v) + ": " + why);
    };
    const auto dot = key.find('.');
    const std::string kind = key.substr(0, dot);
    const std::string target = dot == std::string::npos ? "" : key.substr(dot + 1);

    if (key == "population") {
      if (v < 1 || !whole(v)) bad("population must be a positive integer");
      d.population = static_cast<Count>(v);
    } else if (kind == "transit" && !target.empty()) {
      const auto it = std::find_if(d.arcs.begin(), d.arcs.end(), [&](const Arc& a) { return a.id == target; });
      if (it == d.arcs.end()) {
        // A transform may have removed the arc; only an explicit override is wrong.
        if (overridden) bad("no arc " + target);
        continue;
      }
      if (v < 0 || !whole(v)) bad("transit must be a nonnegative integer");
      it->transit = static_cast<Tick>(v);
    } else if (kind == "dwell" && !target.empty()) {
      const auto it = std::find_if(d.states.begin(), d.states.end(), [&](const StateNode& s) { return s.id == target; });
      if (it == d.states.end()) {
        if (overridden) bad("no state " + target);
        continue;
      }
      if (v < 1 || !whole(v)) bad("dwell limit must be a positive integer");
      it->dwell_limit = static_cast<Tick>(v);
    } else if (kind == "mu0" && !target.empty()) {
      if (d.find_state(target) == nullptr) {
        if (overridden) bad("no state " + target);
        continue;
      }
      if (v < 0 || v > 1) bad("fraction must lie in [0, 1]");
      has_mu0 = true;
      if (v > 0) mu0[target] = v;
    } else {
      bad("unrecognized initial value");
    }
  }
  if (has_mu0) d.mu[0] = mu0;
  return Instantiated{d, validate_canonical(d)};
}

}  // namespace hsgd
