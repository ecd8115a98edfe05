#include "hsgd/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hsgd/error.hpp"
#include "hsgd/kernels.hpp"

namespace hsgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_box(const Box& b) {
  std::ostringstream os;
  for (std::size_t i = 0; i < b.lo.size(); ++i) {
    if (b.lo[i] == -kInf && b.hi[i] == kInf) {
      continue;
    }
    if (os.tellp() > 0) {
      os << " & ";
    }
    os << "x" << i << "∈[" << b.lo[i] << "," << b.hi[i] << ")";
  }
  return os.str();
}

void collect_propositions(const Classifier& c, std::vector<const Proposition*>& out) {
  for (const auto& p : c.root.propositions) {
    out.push_back(&p);
  }
  for (const auto& [_, scale] : c.refinements) {
    for (const auto& p : scale.propositions) {
      out.push_back(&p);
    }
  }
}

}  // namespace

bool Predicate::holds(std::span<const double> params) const {
  if (parameter >= params.size()) {
    return false;
  }
  const double x = params[parameter];
  return x >= lower.value_or(-kInf) && x < upper.value_or(kInf);
}

bool Box::empty() const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) {
      return true;
    }
  }
  return false;
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(x[i] >= lo[i] && x[i] < hi[i])) {
      return false;
    }
  }
  return true;
}

Box intersect(const Box& a, const Box& b) {
  Box out = a;
  for (std::size_t i = 0; i < out.lo.size(); ++i) {
    out.lo[i] = std::max(a.lo[i], b.lo[i]);
    out.hi[i] = std::min(a.hi[i], b.hi[i]);
  }
  return out;
}

bool box_subset(const Box& a, const Box& b) {
  if (a.empty()) {
    return true;
  }
  for (std::size_t i = 0; i < a.lo.size(); ++i) {
    if (a.lo[i] < b.lo[i] || a.hi[i] > b.hi[i]) {
      return false;
    }
  }
  return true;
}

Box Proposition::truth_domain(std::size_t dimension) const {
  Box box{std::vector<double>(dimension, -kInf), std::vector<double>(dimension, kInf)};
  for (const auto& p : predicates) {
    if (p.parameter >= dimension) {
      continue;
    }
    if (p.lower) box.lo[p.parameter] = std::max(box.lo[p.parameter], *p.lower);
    if (p.upper) box.hi[p.parameter] = std::min(box.hi[p.parameter], *p.upper);
  }
  return box;
}

bool Proposition::holds(std::span<const double> params) const {
  return std::all_of(predicates.begin(), predicates.end(), [&](const Predicate& p) { return p.holds(params); });
}

ValidationReport validate_scale(const Scale& scale, std::size_t dimension) {
  ValidationReport report;
  std::set<std::string> ids;
  std::vector<Box> domains;
  for (const auto& prop : scale.propositions) {
    if (!ids.insert(prop.id).second) {
      report.add("scale.duplicate", "duplicate proposition id " + prop.id, {prop.id});
    }
    if (prop.predicates.empty()) {
      report.add("scale.predicate", "proposition " + prop.id + " has no predicates", {prop.id});
    }
    for (const auto& pred : prop.predicates) {
      if (pred.parameter >= dimension) {
        report.add("scale.parameter",
                   "proposition " + prop.id + " refers to parameter x" + std::to_string(pred.parameter) +
                       " beyond dimension " + std::to_string(dimension),
                   {prop.id});
      }
      if (!pred.lower && !pred.upper) {
        report.add("scale.predicate", "predicate of " + prop.id + " has no bound", {prop.id});
      }
      if (pred.lower && pred.upper && !(*pred.lower < *pred.upper)) {
        report.add("scale.predicate", "predicate of " + prop.id + " has lower bound not below upper bound",
                   {prop.id});
      }
    }
    domains.push_back(prop.truth_domain(dimension));
    if (domains.back().empty()) {
      report.add("scale.empty_domain", "truth domain of " + prop.id + " is empty", {prop.id});
    }
  }
  for (std::size_t i = 0; i < domains.size(); ++i) {
    for (std::size_t j = i + 1; j < domains.size(); ++j) {
      const Box overlap = intersect(domains[i], domains[j]);
      if (!overlap.empty()) {
        const auto& a = scale.propositions[i].id;
        const auto& b = scale.propositions[j].id;
        report.add("scale.overlap", "truth domains of " + a + " and " + b + " overlap on " + format_box(overlap),
                   {a, b});
      }
    }
  }
  for (std::size_t i = 1; i < scale.propositions.size(); ++i) {
    const auto& prev = scale.propositions[i - 1];
    const auto& cur = scale.propositions[i];
    if (prev.state_rank >= cur.state_rank) {
      report.add("scale.order",
                 "order mismatch: " + prev.id + " < " + cur.id + " but " + prev.state + " does not rank below " +
                     cur.state,
                 {prev.id, cur.id});
    }
  }
  return report;
}

std::optional<int> Classifier::rank_of(const StateId& state) const {
  std::vector<const Proposition*> props;
  collect_propositions(*this, props);
  for (const auto* p : props) {
    if (p->state == state) {
      return p->state_rank;
    }
  }
  return std::nullopt;
}

ValidationReport validate_classifier(const Classifier& classifier) {
  ValidationReport report = validate_scale(classifier.root, classifier.dimension);
  std::map<std::string, const Proposition*> by_id;
  std::vector<const Proposition*> props;
  collect_propositions(classifier, props);
  for (const auto* p : props) {
    if (!by_id.emplace(p->id, p).second) {
      report.add("classifier.duplicate", "proposition " + p->id + " appears in more than one scale", {p->id});
    }
  }
  // Refinements must hang off a proposition reachable from the root.
  std::set<std::string> reachable;
  std::vector<const Scale*> stack{&classifier.root};
  while (!stack.empty()) {
    const Scale* s = stack.back();
    stack.pop_back();
    for (const auto& p : s->propositions) {
      if (!reachable.insert(p.id).second) {
        continue;
      }
      if (auto it = classifier.refinements.find(p.id); it != classifier.refinements.end()) {
        stack.push_back(&it->second);
      }
    }
  }
  for (const auto& [parent_id, child] : classifier.refinements) {
    auto parent = by_id.find(parent_id);
    if (parent == by_id.end() || reachable.count(parent_id) == 0) {
      report.add("classifier.orphan", "refinement of " + parent_id + " is not attached to the root scale",
                 {parent_id});
      continue;
    }
    report.merge(validate_scale(child, classifier.dimension));
    const Box parent_box = parent->second->truth_domain(classifier.dimension);
    for (const auto& p : child.propositions) {
      if (!box_subset(p.truth_domain(classifier.dimension), parent_box)) {
        report.add("classifier.not_nested",
                   "truth domain of " + p.id + " is not inside that of its parent " + parent_id, {p.id, parent_id});
      }
    }
  }
  return report;
}

std::optional<StateId> classify(const Classifier& classifier, std::span<const double> params) {
  if (params.size() != classifier.dimension) {
    throw Error(ErrorCode::dimension_mismatch, "expected " + std::to_string(classifier.dimension) +
                                                   " parameters, got " + std::to_string(params.size()));
  }
  const Scale* scale = &classifier.root;
  const Proposition* match = nullptr;
  while (scale != nullptr) {
    const Proposition* found = nullptr;
    for (const auto& p : scale->propositions) {
      if (p.holds(params)) {
        found = &p;
        break;
      }
    }
    if (found == nullptr) {
      break;
    }
    match = found;
    auto it = classifier.refinements.find(found->id);
    scale = it == classifier.refinements.end() ? nullptr : &it->second;
  }
  if (match == nullptr) {
    return std::nullopt;
  }
  return match->state;
}

std::vector<std::optional<StateId>> classify_batch(const Classifier& classifier, std::span<const double> rows) {
  const std::size_t dim = classifier.dimension;
  if (dim == 0 || rows.size() % dim != 0) {
    throw Error(ErrorCode::dimension_mismatch, "batch size is not a multiple of the dimension");
  }
  const std::size_t count = rows.size() / dim;
  std::vector<std::vector<double>> columns(dim, std::vector<double>(count));
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      columns[c][r] = rows[r * dim + c];
    }
  }

  std::vector<const Proposition*> props;
  collect_propositions(classifier, props);
  std::map<const Proposition*, std::vector<std::uint8_t>> masks;
  for (const auto* p : props) {
    std::vector<std::uint8_t> mask(count, 1);
    for (const auto& pred : p->predicates) {
      if (pred.parameter >= dim) {
        std::fill(mask.begin(), mask.end(), std::uint8_t{0});
        continue;
      }
      kernels::refine_interval_mask(columns[pred.parameter], pred.lower.value_or(-kInf),
                                    pred.upper.value_or(kInf), mask);
    }
    masks.emplace(p, std::move(mask));
  }

  std::vector<std::optional<StateId>> out(count);
  for (std::size_t r = 0; r < count; ++r) {
    const Scale* scale = &classifier.root;
    const Proposition* match = nullptr;
    while (scale != nullptr) {
      const Proposition* found = nullptr;
      for (const auto& p : scale->propositions) {
        if (masks.at(&p)[r] != 0) {
          found = &p;
          break;
        }
      }
      if (found == nullptr) {
        break;
      }
      match = found;
      auto it = classifier.refinements.find(found->id);
      scale = it == classifier.refinements.end() ? nullptr : &it->second;
    }
    if (match != nullptr) {
      out[r] = match->state;
    }
  }
  return out;
}

Reestimate reestimate_from(const StateId& prev_state, const std::optional<StateId>& classified,
                           const Classifier& classifier) {
  const auto prev_rank = classifier.rank_of(prev_state);
  if (!prev_rank) {
    throw Error(ErrorCode::unknown_state, "state " + prev_state + " is not mapped by the classifier");
  }
  if (!classified) {
    return Reestimate{prev_state, ReestimateFlags{true, false}};
  }
  const int cur_rank = classifier.rank_of(*classified).value_or(*prev_rank);
  return Reestimate{*classified, ReestimateFlags{false, std::abs(cur_rank - *prev_rank) > 1}};
}

Reestimate reestimate_state(const StateId& prev_state, std::span<const double> prev_params,
                            std::span<const double> cur_params, const Classifier& classifier) {
  if (!prev_params.empty() && prev_params.size() != classifier.dimension) {
    throw Error(ErrorCode::dimension_mismatch, "previous parameter vector has the wrong dimension");
  }
  return reestimate_from(prev_state, classify(classifier, cur_params), classifier);
}

ValidationReport validate_matrix(const ClassificationMatrix& matrix, const Classifier& classifier) {
  ValidationReport report;
  std::vector<const Proposition*> props;
  collect_propositions(classifier, props);
  std::set<std::string> known;
  for (const auto* p : props) {
    known.insert(p->id);
  }
  if (matrix.cells.size() > classifier.dimension) {
    report.add("matrix.rows", "matrix has more parameter rows than the classifier dimension");
  }
  for (std::size_t i = 0; i < matrix.cells.size(); ++i) {
    if (matrix.cells[i].size() != matrix.classes.size()) {
      report.add("matrix.shape", "row x" + std::to_string(i) + " does not have one cell per class");
    }
    for (const auto& cell : matrix.cells[i]) {
      if (!cell.empty() && known.count(cell) == 0) {
        report.add("matrix.rule", "cell refers to unknown proposition " + cell, {cell});
      }
    }
  }
  return report;
}

}  // namespace hsgd
