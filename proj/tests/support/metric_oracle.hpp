#pragma once

#include "hsgd/engine.hpp"

namespace hsgd::testing {

struct OracleMetrics {
  bool complete = false;
  Count redundancy = 0;
  double omitted_ratio = 0.0;
  double complexness = 0.0;
  double resource = 0.0;
};

// Recounts the scenario metrics by following every object through the raw
// event log; shares no code with the engine's own bookkeeping.
OracleMetrics recount(const Trajectory& trajectory, const HsgdModel& model);

}  // namespace hsgd::testing
