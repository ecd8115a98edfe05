#include "hsgd/error.hpp"

namespace hsgd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::insufficient_occupancy: return "InsufficientOccupancy";
    case ErrorCode::tick_out_of_range: return "TickOutOfRange";
    case ErrorCode::state_set_mismatch: return "StateSetMismatch";
    case ErrorCode::unknown_arc: return "UnknownArc";
    case ErrorCode::unknown_state: return "UnknownState";
    case ErrorCode::unknown_symbol: return "UnknownSymbol";
    case ErrorCode::unknown_diagram: return "UnknownDiagram";
    case ErrorCode::unknown_support_state: return "UnknownSupportState";
    case ErrorCode::unknown_goal_state: return "UnknownGoalState";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::series_too_short: return "SeriesTooShort";
    case ErrorCode::unsampled_boundary: return "UnsampledBoundary";
    case ErrorCode::unclassified: return "Unclassified";
    case ErrorCode::precondition_violated: return "PreconditionViolated";
    case ErrorCode::id_collision: return "IdCollision";
    case ErrorCode::assembly_rejected: return "AssemblyRejected";
    case ErrorCode::inconsistent_state: return "InconsistentState";
    case ErrorCode::trajectory_model_mismatch: return "TrajectoryModelMismatch";
    case ErrorCode::model_mismatch: return "ModelMismatch";
    case ErrorCode::no_plan_exists: return "NoPlanExists";
    case ErrorCode::invalid_override: return "InvalidOverride";
    case ErrorCode::transform_breaks_order: return "TransformBreaksOrder";
    case ErrorCode::unsorted_input: return "UnsortedInput";
    case ErrorCode::parse_failure: return "ParseFailure";
  }
  return "Unknown";
}

}  // namespace hsgd
