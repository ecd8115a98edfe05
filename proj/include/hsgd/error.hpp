#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsgd {

enum class ErrorCode {
  insufficient_occupancy,
  tick_out_of_range,
  state_set_mismatch,
  unknown_arc,
  unknown_state,
  unknown_symbol,
  unknown_diagram,
  unknown_support_state,
  unknown_goal_state,
  dimension_mismatch,
  series_too_short,
  unsampled_boundary,
  unclassified,
  precondition_violated,
  id_collision,
  assembly_rejected,
  inconsistent_state,
  trajectory_model_mismatch,
  model_mismatch,
  no_plan_exists,
  invalid_override,
  transform_breaks_order,
  unsorted_input,
  parse_failure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hsgd
