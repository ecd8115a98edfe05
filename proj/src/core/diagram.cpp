#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "hsgd/core.hpp"

namespace hsgd {

namespace {

constexpr double kMassTolerance = 1e-9;

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

int TimePartition::interval_of(Tick tick) const {
  const auto n = static_cast<int>(interval_count());
  if (tick <= 0) {
    return 1;
  }
  for (int j = 1; j <= n; ++j) {
    if (tick <= boundaries[static_cast<std::size_t>(j)]) {
      return j;
    }
  }
  return n + 1;
}

ValidationReport TimePartition::validate() const {
  ValidationReport report;
  if (boundaries.empty()) {
    report.add("partition.empty", "partition has no boundaries");
    return report;
  }
  if (boundaries.front() != 0) {
    report.add("partition.origin", "partition must start at tick 0");
  }
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) {
      report.add("partition.order",
                 "partition boundaries not strictly increasing at τ" + std::to_string(i));
    }
  }
  return report;
}

double total_mass(const Distribution& d) {
  double sum = 0.0;
  for (const auto& [_, v] : d) {
    sum += v;
  }
  return sum;
}

const StateNode* CanonicalDiagram::find_state(const StateId& state) const {
  auto it = std::find_if(states.begin(), states.end(), [&](const StateNode& s) { return s.id == state; });
  return it == states.end() ? nullptr : &*it;
}

const Arc* CanonicalDiagram::find_arc(const ArcId& arc) const {
  auto it = std::find_if(arcs.begin(), arcs.end(), [&](const Arc& a) { return a.id == arc; });
  return it == arcs.end() ? nullptr : &*it;
}

StateRole CanonicalDiagram::role(const StateId& state) const {
  if (state == initial) {
    return StateRole::initial;
  }
  if (state == final_state) {
    return StateRole::final;
  }
  return StateRole::intermediate;
}

std::vector<StateId> CanonicalDiagram::states_by_rank() const {
  std::vector<const StateNode*> sorted;
  sorted.reserve(states.size());
  for (const auto& s : states) {
    sorted.push_back(&s);
  }
  std::sort(sorted.begin(), sorted.end(), [](const StateNode* a, const StateNode* b) {
    return a->rank != b->rank ? a->rank < b->rank : a->id < b->id;
  });
  std::vector<StateId> ids;
  ids.reserve(sorted.size());
  for (const auto* s : sorted) {
    ids.push_back(s->id);
  }
  return ids;
}

int CanonicalDiagram::ordinal(const StateId& state) const {
  const auto order = states_by_rank();
  auto it = std::find(order.begin(), order.end(), state);
  return it == order.end() ? -1 : static_cast<int>(it - order.begin());
}

Distribution CanonicalDiagram::initial_distribution() const {
  if (auto it = mu.find(0); it != mu.end()) {
    return it->second;
  }
  return Distribution{{initial, 1.0}};
}

std::map<StateId, Count> CanonicalDiagram::initial_counts() const {
  return to_counts(*this, initial_distribution(), population);
}

std::vector<StateId> forward_reachable(const CanonicalDiagram& diagram) {
  std::set<StateId> seen;
  std::deque<StateId> queue;
  if (diagram.find_state(diagram.initial) != nullptr) {
    seen.insert(diagram.initial);
    queue.push_back(diagram.initial);
  }
  while (!queue.empty()) {
    const StateId cur = queue.front();
    queue.pop_front();
    for (const auto& arc : diagram.arcs) {
      if (arc.kind == ArcKind::forward && arc.source == cur && diagram.find_state(arc.target) != nullptr &&
          seen.insert(arc.target).second) {
        queue.push_back(arc.target);
      }
    }
  }
  std::vector<StateId> out;
  for (const auto& id : diagram.states_by_rank()) {
    if (seen.count(id) != 0) {
      out.push_back(id);
    }
  }
  return out;
}

Distribution over_states(const CanonicalDiagram& diagram, const Distribution& d) {
  Distribution out;
  for (const auto& s : diagram.states) {
    auto it = d.find(s.id);
    out[s.id] = it == d.end() ? 0.0 : it->second;
  }
  return out;
}

std::map<StateId, Count> to_counts(const CanonicalDiagram& diagram, const Distribution& d,
                                   Count population) {
  struct Share {
    StateId id;
    Count count;
    double remainder;
    int ordinal;
  };
  const auto order = diagram.states_by_rank();
  std::vector<Share> shares;
  Count assigned = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = d.find(order[i]);
    const double exact = (it == d.end() ? 0.0 : it->second) * static_cast<double>(population);
    const auto rounded = static_cast<Count>(std::floor(exact + 0.5));
    shares.push_back(Share{order[i], rounded, exact - static_cast<double>(rounded), static_cast<int>(i)});
    assigned += rounded;
  }
  // Residual correction: hand missing objects to the largest positive
  // remainders, take surplus from the most negative ones.
  auto by_remainder_desc = [](const Share& a, const Share& b) {
    return a.remainder != b.remainder ? a.remainder > b.remainder : a.ordinal < b.ordinal;
  };
  while (assigned < population && !shares.empty()) {
    auto it = std::min_element(shares.begin(), shares.end(), by_remainder_desc);
    it->count += 1;
    it->remainder -= 1.0;
    ++assigned;
  }
  while (assigned > population) {
    Share* pick = nullptr;
    for (auto& s : shares) {
      if (s.count > 0 && (pick == nullptr || s.remainder < pick->remainder ||
                          (s.remainder == pick->remainder && s.ordinal > pick->ordinal))) {
        pick = &s;
      }
    }
    if (pick == nullptr) {
      break;
    }
    auto it = pick;
    it->count -= 1;
    it->remainder += 1.0;
    --assigned;
  }
  std::map<StateId, Count> counts;
  for (const auto& s : shares) {
    counts[s.id] = s.count;
  }
  return counts;
}

ValidationReport validate_canonical(const CanonicalDiagram& diagram) {
  ValidationReport report = diagram.partition.validate();
  const auto n_intervals = static_cast<int>(diagram.partition.interval_count());

  if (diagram.population <= 0) {
    report.add("diagram.population", "population must be positive", {diagram.id});
  }

  std::set<StateId> ids;
  std::map<int, StateId> ranks;
  for (const auto& s : diagram.states) {
    if (!ids.insert(s.id).second) {
      report.add("state.duplicate", "duplicate state id " + s.id, {s.id});
    }
    if (auto [it, inserted] = ranks.emplace(s.rank, s.id); !inserted) {
      report.add("state.rank_duplicate",
                 "rank " + std::to_string(s.rank) + " shared by " + it->second + " and " + s.id,
                 {it->second, s.id});
    }
    if (s.level_interval && (*s.level_interval < 0 || *s.level_interval > n_intervals)) {
      report.add("state.interval_range", "state " + s.id + " refers to interval outside the partition",
                 {s.id});
    }
    if (s.dwell_limit && *s.dwell_limit < 1) {
      report.add("state.dwell", "dwell limit of " + s.id + " must be at least 1 tick", {s.id});
    }
  }
  for (const auto& a : diagram.states) {
    for (const auto& b : diagram.states) {
      if (a.level_interval && b.level_interval && *a.level_interval < *b.level_interval &&
          a.rank >= b.rank) {
        report.add("state.interval_order",
                   "state " + a.id + " of an earlier interval does not rank below " + b.id, {a.id, b.id});
      }
    }
  }

  if (diagram.find_state(diagram.initial) == nullptr) {
    report.add("role.initial", "initial state " + diagram.initial + " is not declared", {diagram.initial});
  }
  if (diagram.find_state(diagram.final_state) == nullptr) {
    report.add("role.final", "final state " + diagram.final_state + " is not declared",
               {diagram.final_state});
  }
  if (diagram.initial == diagram.final_state && diagram.states.size() > 1) {
    report.add("role.shared", "initial and final state coincide in a multi-state diagram", {diagram.initial});
  }

  std::set<ArcId> arc_ids;
  for (const auto& arc : diagram.arcs) {
    if (!arc_ids.insert(arc.id).second) {
      report.add("arc.duplicate", "duplicate arc id " + arc.id, {arc.id});
    }
    const auto* src = diagram.find_state(arc.source);
    const auto* dst = diagram.find_state(arc.target);
    if (src == nullptr || dst == nullptr) {
      report.add("arc.endpoint", "arc " + arc.id + " refers to an undeclared state", {arc.id});
      continue;
    }
    if (arc.kind == ArcKind::forward) {
      if (src->rank >= dst->rank) {
        report.add("arc.order",
                   "forward arc violates order: " + arc.id + " (" + arc.source + " -> " + arc.target + ")",
                   {arc.id});
      }
      if (arc.transit < 1) {
        report.add("arc.transit", "forward arc " + arc.id + " needs a transit of at least 1 tick", {arc.id});
      }
    } else {
      if (dst->rank > src->rank) {
        report.add("arc.order",
                   "backstep arc violates order: " + arc.id + " (" + arc.source + " -> " + arc.target + ")",
                   {arc.id});
      }
      if (arc.transit != 0) {
        report.add("arc.transit", "backstep arc " + arc.id + " must be instantaneous", {arc.id});
      }
    }
    if (arc.kind == ArcKind::forward && arc.source == diagram.final_state) {
      report.add("final.outgoing", "final state " + diagram.final_state + " has outgoing forward arc " + arc.id,
                 {arc.id});
    }
  }

  for (const auto& [index, dist] : diagram.mu) {
    const auto tag = "τ" + std::to_string(index);
    if (index < 0 || index > n_intervals) {
      report.add("mu.boundary", "distribution declared at " + tag + " outside the partition");
      continue;
    }
    bool negative = false;
    for (const auto& [state, value] : dist) {
      if (diagram.find_state(state) == nullptr) {
        report.add("mu.state", "distribution at " + tag + " refers to undeclared state " + state, {state});
      }
      negative = negative || value < 0.0;
    }
    if (negative) {
      report.add("mu.negative", "distribution at " + tag + " has negative mass");
    }
    const double sum = total_mass(dist);
    if (std::fabs(sum - 1.0) > kMassTolerance) {
      report.add("mu.normalization", "distribution not normalized at " + tag + " (sum " + fmt_double(sum) + ")");
    }
  }

  if (diagram.find_state(diagram.initial) != nullptr) {
    const auto reachable = forward_reachable(diagram);
    const std::set<StateId> reach(reachable.begin(), reachable.end());
    for (const auto& id : diagram.states_by_rank()) {
      if (reach.count(id) == 0) {
        report.add("reach.unreachable", "state " + id + " unreachable from " + diagram.initial, {id});
      }
    }
  }
  return report;
}

}  // namespace hsgd
