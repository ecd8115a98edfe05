#include <algorithm>
#include <map>
#include <set>

#include "hsgd/classifier.hpp"
#include "hsgd/error.hpp"

namespace hsgd {

BuiltDiagram build_canonical_from_history(const DiagramId& id, std::span<const ObjectHistory> histories,
                                          const Classifier& classifier, const TimePartition& partition) {
  if (histories.empty()) {
    throw Error(ErrorCode::precondition_violated, "at least one object history is required");
  }

  struct Move {
    StateId from;
    StateId to;
    Tick gap;
  };
  std::vector<std::vector<StateId>> classified(histories.size());
  std::vector<Move> moves;
  std::map<StateId, int> seen;  // state -> rank

  for (std::size_t o = 0; o < histories.size(); ++o) {
    const auto& h = histories[o];
    for (std::size_t k = 1; k < h.samples.size(); ++k) {
      if (h.samples[k].tick <= h.samples[k - 1].tick) {
        throw Error(ErrorCode::unsorted_input, "samples of object " + h.object + " are not in tick order");
      }
    }
    for (Tick boundary : partition.boundaries) {
      const bool sampled = std::any_of(h.samples.begin(), h.samples.end(),
                                       [&](const Sample& s) { return s.tick == boundary; });
      if (!sampled) {
        throw Error(ErrorCode::unsampled_boundary,
                    "object " + h.object + " has no sample at tick " + std::to_string(boundary));
      }
    }
    auto& states = classified[o];
    for (std::size_t k = 0; k < h.samples.size(); ++k) {
      const auto cls = classify(classifier, h.samples[k].params);
      if (k == 0) {
        if (!cls) {
          throw Error(ErrorCode::unclassified, "first sample of object " + h.object + " matches no proposition");
        }
        states.push_back(*cls);
      } else {
        states.push_back(reestimate_from(states.back(), cls, classifier).state);
        if (states[k] != states[k - 1]) {
          moves.push_back(Move{states[k - 1], states[k], h.samples[k].tick - h.samples[k - 1].tick});
        }
      }
      seen.emplace(states.back(), classifier.rank_of(states.back()).value_or(0));
    }
  }

  BuiltDiagram out;
  auto& d = out.diagram;
  d.id = id;
  d.partition = partition;
  d.population = static_cast<Count>(histories.size());
  for (const auto& [state, rank] : seen) {
    d.states.push_back(StateNode{state, rank, std::nullopt, std::nullopt});
  }
  const auto order = d.states_by_rank();
  d.initial = order.front();
  d.final_state = order.back();

  // One arc per observed (from, to) pair; transit is the shortest observed gap.
  std::map<std::pair<StateId, StateId>, Tick> forward;
  std::set<std::pair<StateId, StateId>> backward;
  for (const auto& m : moves) {
    const int rf = seen.at(m.from);
    const int rt = seen.at(m.to);
    if (rf < rt) {
      auto [it, inserted] = forward.emplace(std::make_pair(m.from, m.to), m.gap);
      if (!inserted) it->second = std::min(it->second, m.gap);
    } else if (rt < rf) {
      backward.insert({m.from, m.to});
    } else {
      out.report.add("build.equal_rank", "observed move between equally ranked states " + m.from + " and " + m.to,
                     {m.from, m.to});
    }
  }
  for (const auto& [ends, gap] : forward) {
    d.arcs.push_back(Arc{"f_" + ends.first + "_" + ends.second, ends.first, ends.second, ArcKind::forward, gap});
  }
  for (const auto& ends : backward) {
    d.arcs.push_back(Arc{"b_" + ends.first + "_" + ends.second, ends.first, ends.second, ArcKind::backstep, 0});
  }

  for (std::size_t i = 0; i < partition.boundaries.size(); ++i) {
    std::map<StateId, Count> counts;
    for (std::size_t o = 0; o < histories.size(); ++o) {
      const auto& samples = histories[o].samples;
      for (std::size_t k = 0; k < samples.size(); ++k) {
        if (samples[k].tick == partition.boundaries[i]) {
          counts[classified[o][k]] += 1;
        }
      }
    }
    Distribution mu;
    for (const auto& [state, c] : counts) {
      mu[state] = static_cast<double>(c) / static_cast<double>(d.population);
    }
    d.mu[static_cast<int>(i)] = mu;
  }

  out.report.merge(validate_canonical(d));
  return out;
}

}  // namespace hsgd
