#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsgd/classifier.hpp"
#include "hsgd/hierarchy.hpp"

namespace hsgd::io {

struct MonitoringRecord {
  Tick tick = 0;
  std::string object;
  DiagramId diagram;
  std::vector<double> params;

  bool operator==(const MonitoringRecord&) const = default;
};

// Header tick,object,diagram,p1..pN. Throws ParseFailure with the line.
std::vector<MonitoringRecord> read_monitoring_csv(std::string_view text);
std::string write_monitoring_csv(std::span<const MonitoringRecord> records);

struct Anomaly {
  DiagramId diagram;
  std::string object;
  Tick tick = 0;
  StateId from;
  StateId to;
  std::string message;  // "no-arc S0→S2"

  bool operator==(const Anomaly&) const = default;
};

struct IngestFlag {
  DiagramId diagram;
  std::string object;
  Tick tick = 0;
  ReestimateFlags flags;

  bool operator==(const IngestFlag&) const = default;
};

struct IngestResult {
  std::map<DiagramId, ActualDynamics> dynamics;
  std::vector<Anomaly> anomalies;
  std::vector<IngestFlag> flags;
  // L1 distance to μi at each boundary inside the observed range.
  std::map<DiagramId, std::map<int, double>> divergence;
};

// Records must be sorted by tick. Each object's first record fixes its state
// for all earlier ticks; an unclassified record puts it in transit until the
// next classified one. A change of state counts on the arc joining the two
// states, or is reported as an anomaly with the object held where it was.
// Throws UnsortedInput, UnknownDiagram, DimensionMismatch.
IngestResult ingest_monitoring(std::span<const MonitoringRecord> records, const HsgdModel& model,
                               const std::map<DiagramId, Classifier>& classifiers);

}  // namespace hsgd::io
