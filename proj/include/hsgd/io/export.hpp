#pragma once

#include <span>
#include <string>
#include <vector>

#include "hsgd/engine.hpp"
#include "hsgd/io/dsl.hpp"
#include "hsgd/io/monitoring.hpp"
#include "hsgd/planner.hpp"
#include "json.hpp"

namespace hsgd::io {

using Json = nlohmann::json;

std::string engine_version();

// Sorted keys, two-space indent, reals with six fractional digits, trailing
// newline. Equal values always give equal bytes.
std::string canonical_dump(const Json& value);

Json to_json(const ScenarioReport& report);
Json to_json(const Trajectory& trajectory);
Json to_json(const ValidationReport& report);
Json to_json(std::span<const Diagnostic> diagnostics);
Json to_json(std::span<const Plan> plans);
Json to_json(std::span<const RankedReport> ranking);
Json to_json(const IngestResult& result);
Json to_json(const ObjectivesReport& report);
Json schedule_to_json(const TimeDiagram& schedule);

// Throws ParseFailure on missing or mistyped fields.
ScenarioReport report_from_json(const Json& value);
TimeDiagram schedule_from_json(const Json& value);

std::string export_report(const ScenarioReport& report);
std::string export_trajectory(const Trajectory& trajectory);

}  // namespace hsgd::io
