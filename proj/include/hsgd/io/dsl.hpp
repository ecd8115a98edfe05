#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hsgd/classifier.hpp"
#include "hsgd/engine.hpp"
#include "hsgd/hierarchy.hpp"
#include "hsgd/planner.hpp"

namespace hsgd::io {

struct SourceLocation {
  int line = 0;
  int column = 0;
};

// Stable codes: E_EMPTY, E_SYNTAX, E_NUMBER, E_BAD_ID, E_UNTERMINATED,
// E_MISSING, E_DUPLICATE, E_UNDEF_DIAGRAM, E_UNDEF_STATE, E_UNDEF_ARC,
// E_UNDEF_SYMBOL, E_UNDEF_NODE.
struct Diagnostic {
  std::string code;
  std::string message;
  SourceLocation location;

  bool operator==(const Diagnostic&) const = default;
};

std::string format_diagnostic(const Diagnostic& d);

struct ModelDocument {
  std::vector<CanonicalDiagram> diagrams;
  std::map<DiagramId, Classifier> scales;
  std::vector<TopologyEdge> topology;
  std::vector<AggregationMap> aggregation;
  std::vector<CoupledArc> couplings;
  InterLevelRule rule;
  std::map<DiagramId, std::vector<TransitionRule>> rules;
  std::optional<ObjectivesTree> objectives;
  std::vector<ControlScenario> scenarios;
  // "<kind> <id>" -> where it was declared, e.g. "arc demo3.a01",
  // "symbol x01", "scenario full". Not part of equality.
  std::map<std::string, SourceLocation> locations;

  const ControlScenario* find_scenario(const std::string& id) const;
  std::optional<SourceLocation> locate(const std::string& key) const;
  bool operator==(const ModelDocument& other) const;
};

struct ParseResult {
  std::optional<ModelDocument> document;  // set only when diagnostics is empty
  std::vector<Diagnostic> diagnostics;

  bool ok() const noexcept { return document.has_value(); }
};

ParseResult parse_model(std::string_view text);

// Canonical text; parse_model(serialize_model(doc)) yields a document equal
// to doc.
std::string serialize_model(const ModelDocument& doc);

// FNV-1a 64 over the canonical text, as 16 hex digits.
std::string model_hash(const ModelDocument& doc);
std::uint64_t fnv1a64(std::string_view bytes);

// Throws AssemblyRejected.
HsgdModel assemble_document(const ModelDocument& doc);

// Model, scales, rule bases, objectives and scenarios; never throws.
ValidationReport validate_document(const ModelDocument& doc);

}  // namespace hsgd::io
