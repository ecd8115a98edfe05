#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsgd/core.hpp"
#include "hsgd/validation.hpp"

namespace hsgd {

// lower <= x[parameter] < upper; a missing bound is unbounded.
struct Predicate {
  std::size_t parameter = 0;
  std::optional<double> lower;
  std::optional<double> upper;

  bool holds(std::span<const double> params) const;
  bool operator==(const Predicate&) const = default;
};

// Axis-aligned truth domain: per-parameter half-open interval [lo, hi).
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  bool empty() const;
  bool contains(std::span<const double> x) const;
  bool operator==(const Box&) const = default;
};

Box intersect(const Box& a, const Box& b);
// a ⊆ b (an empty box is contained in everything).
bool box_subset(const Box& a, const Box& b);

struct Proposition {
  std::string id;
  std::vector<Predicate> predicates;  // conjunction
  StateId state;
  int state_rank = 0;

  Box truth_domain(std::size_t dimension) const;
  bool holds(std::span<const double> params) const;
  bool operator==(const Proposition&) const = default;
};

// Propositions in scale order K1 < K2 < ... < Kn.
struct Scale {
  std::vector<Proposition> propositions;

  bool operator==(const Scale&) const = default;
};

// Truth domains must be pairwise disjoint and the proposition order must
// match the mapped state ranks.
ValidationReport validate_scale(const Scale& scale, std::size_t dimension);

struct Classifier {
  std::size_t dimension = 1;
  Scale root;
  // Proposition id -> its hierarchical continuation.
  std::map<std::string, Scale> refinements;

  // Rank of a mapped state, if any proposition maps to it.
  std::optional<int> rank_of(const StateId& state) const;
  bool operator==(const Classifier&) const = default;
};

ValidationReport validate_classifier(const Classifier& classifier);

// State of the deepest matching proposition, or nullopt (Unclassified).
// Throws ErrorCode::dimension_mismatch.
std::optional<StateId> classify(const Classifier& classifier, std::span<const double> params);

// Row-major batch: rows.size() == count * dimension. Same result as calling
// classify() per row; membership is evaluated column-wise with the kernels.
std::vector<std::optional<StateId>> classify_batch(const Classifier& classifier, std::span<const double> rows);

enum class Trend { monotone_increasing, monotone_decreasing, non_monotone, constant };

std::string_view to_string(Trend trend);

struct DynamicsProfile {
  Trend trend = Trend::constant;
  std::vector<std::size_t> critical_points;
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<std::size_t> inflexions;
  bool cyclic = false;
  double period = 0.0;  // 0 when not cyclic
  std::size_t mean_crossings = 0;
};

// Trend, critical points, bounds, inflexions and cyclicity of a sampled
// parameter. Differences within ±tolerance count as flat.
DynamicsProfile recognize_dynamics(std::span<const double> series, double tolerance);

struct ReestimateFlags {
  bool gap_hold = false;
  bool rank_jump = false;

  bool operator==(const ReestimateFlags&) const = default;
};

struct Reestimate {
  StateId state;
  ReestimateFlags flags;
};

// S(t) = F(S(t-1), X(t-1), X(t)): the classification of the current
// parameters, or the previous state held over a gap.
Reestimate reestimate_state(const StateId& prev_state, std::span<const double> prev_params,
                            std::span<const double> cur_params, const Classifier& classifier);

// Same rule applied to an already computed classification.
Reestimate reestimate_from(const StateId& prev_state, const std::optional<StateId>& classified,
                           const Classifier& classifier);

// Rows are parameters, columns are object classes, cells name propositions.
struct ClassificationMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::string>> cells;  // [parameter][class]

  bool operator==(const ClassificationMatrix&) const = default;
};

ValidationReport validate_matrix(const ClassificationMatrix& matrix, const Classifier& classifier);

struct Sample {
  Tick tick = 0;
  std::vector<double> params;
};

struct ObjectHistory {
  std::string object;
  std::vector<Sample> samples;  // ascending ticks
};

struct BuiltDiagram {
  CanonicalDiagram diagram;
  ValidationReport report;
};

// Classifies every sample, adds a forward arc for each observed rank increase
// and a backstep arc for each decrease, and records the observed distribution
// at each partition boundary as μi.
BuiltDiagram build_canonical_from_history(const DiagramId& id, std::span<const ObjectHistory> histories,
                                          const Classifier& classifier, const TimePartition& partition);

}  // namespace hsgd
