#include "hsgd/io/monitoring.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "hsgd/error.hpp"

namespace hsgd::io {

namespace {

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_line(int line, const std::string& why) {
  throw Error(ErrorCode::parse_failure, "monitoring line " + std::to_string(line) + ": " + why);
}

template <class T>
T parse_cell(const std::string& cell, int line, const char* what) {
  T v{};
  const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
    bad_line(line, std::string("malformed ") + what + " '" + cell + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct Track {
  std::optional<StateId> settled;
  bool in_transit = false;
  std::optional<std::pair<StateId, StateId>> last_anomaly;
};

const Arc* arc_between(const CanonicalDiagram& d, const StateId& from, const StateId& to) {
  const Arc* best = nullptr;
  for (const auto& a : d.arcs) {
    if (a.source == from && a.target == to && (best == nullptr || a.id < best->id)) best = &a;
  }
  return best;
}

}  // namespace

std::vector<MonitoringRecord> read_monitoring_csv(std::string_view text) {
  std::vector<MonitoringRecord> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  std::size_t dimension = 0;
  bool header = false;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(raw);
    if (!header) {
      if (cells.size() < 3 || cells[0] != "tick" || cells[1] != "object" || cells[2] != "diagram") {
        bad_line(line, "header must start with tick,object,diagram");
      }
      for (std::size_t i = 3; i < cells.size(); ++i) {
        if (cells[i] != "p" + std::to_string(i - 2)) bad_line(line, "parameter columns must be named p1..pN");
      }
      dimension = cells.size() - 3;
      header = true;
      continue;
    }
    if (cells.size() != dimension + 3) {
      bad_line(line, "expected " + std::to_string(dimension + 3) + " fields, found " + std::to_string(cells.size()));
    }
    MonitoringRecord r;
    r.tick = parse_cell<Tick>(cells[0], line, "tick");
    if (r.tick < 0) bad_line(line, "tick must be nonnegative");
    r.object = cells[1];
    r.diagram = cells[2];
    if (r.object.empty() || r.diagram.empty()) bad_line(line, "object and diagram must be named");
    for (std::size_t i = 3; i < cells.size(); ++i) r.params.push_back(parse_cell<double>(cells[i], line, "parameter"));
    out.push_back(std::move(r));
  }
  if (!header) throw Error(ErrorCode::parse_failure, "monitoring input has no header");
  return out;
}

std::string write_monitoring_csv(std::span<const MonitoringRecord> records) {
  std::size_t dimension = records.empty() ? 0 : records.front().params.size();
  std::string out = "tick,object,diagram";
  for (std::size_t i = 1; i <= dimension; ++i) out += ",p" + std::to_string(i);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.tick) + ',' + r.object + ',' + r.diagram;
    for (double v : r.params) out += ',' + fmt(v);
    out += '\n';
  }
  return out;
}

IngestResult ingest_monitoring(std::span<const MonitoringRecord> records, const HsgdModel& model,
                               const std::map<DiagramId, Classifier>& classifiers) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].tick < records[i - 1].tick) {
      throw Error(ErrorCode::unsorted_input, "record " + std::to_string(i + 1) + " at tick " +
                                                 std::to_string(records[i].tick) + " follows tick " +
                                                 std::to_string(records[i - 1].tick));
    }
  }
  std::map<DiagramId, std::vector<std::size_t>> by_diagram;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (model.find_diagram(r.diagram) == nullptr) {
      throw Error(ErrorCode::unknown_diagram, "record for unknown diagram " + r.diagram);
    }
    const auto c = classifiers.find(r.diagram);
    if (c == classifiers.end()) throw Error(ErrorCode::unknown_diagram, "no classifier for diagram " + r.diagram);
    if (r.params.size() != c->second.dimension) {
      throw Error(ErrorCode::dimension_mismatch, "record " + std::to_string(i + 1) + " has " +
                                                     std::to_string(r.params.size()) + " parameters, classifier of " +
                                                     r.diagram + " expects " + std::to_string(c->second.dimension));
    }
    by_diagram[r.diagram].push_back(i);
  }

  IngestResult out;
  for (const auto& [id, d] : model.diagrams) {
    const auto& idx = by_diagram[id];
    const Tick horizon = idx.empty() ? 0 : records[idx.back()].tick;
    ActualDynamics dyn;
    dyn.diagram = id;
    const auto len = static_cast<std::size_t>(horizon + 1);
    for (const auto& s : d.states) dyn.occupancy[s.id].assign(len, 0);
    for (const auto& a : d.arcs) dyn.eta[a.id].assign(len, 0);
    dyn.in_transit.assign(len, 0);
    if (idx.empty()) {
      out.dynamics[id] = std::move(dyn);
      continue;
    }

    const Classifier& classifier = classifiers.at(id);
    std::vector<double> rows;
    rows.reserve(idx.size() * classifier.dimension);
    for (auto i : idx) rows.insert(rows.end(), records[i].params.begin(), records[i].params.end());
    const auto classes = classify_batch(classifier, rows);
    auto known = [&](const std::optional<StateId>& c) { return c && d.find_state(*c) != nullptr; };

    // Objects are counted from tick 0 in the state of their first record.
    std::map<std::string, Track> tracks;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto [it, fresh] = tracks.try_emplace(records[idx[k]].object);
      if (!fresh) continue;
      if (known(classes[k])) {
        it->second.settled = classes[k];
      } else {
        it->second.in_transit = true;
      }
    }
    dyn.population = static_cast<Count>(tracks.size());

    std::size_t k = 0;
    for (Tick t = 0; t <= horizon; ++t) {
      for (; k < idx.size() && records[idx[k]].tick == t; ++k) {
        const auto& rec = records[idx[k]];
        Track& tr = tracks[rec.object];
        const auto& cls = classes[k];
        if (!tr.settled) {
          // Not yet placed: the first classified record settles it.
          if (known(cls)) {
            tr.settled = cls;
            tr.in_transit = false;
          }
          continue;
        }
        const auto re = reestimate_from(*tr.settled, known(cls) ? cls : std::nullopt, classifier);
        if (re.flags.gap_hold || re.flags.rank_jump) out.flags.push_back(IngestFlag{id, rec.object, t, re.flags});
        if (re.flags.gap_hold) {
          tr.in_transit = true;
          continue;
        }
        tr.in_transit = false;
        if (re.state == *tr.settled) {
          tr.last_anomaly.reset();
          continue;
        }
        if (const Arc* arc = arc_between(d, *tr.settled, re.state)) {
          auto& series = dyn.eta[arc->id];
          for (auto j = static_cast<std::size_t>(t); j < len; ++j) ++series[j];
          tr.settled = re.state;
          tr.last_anomaly.reset();
          continue;
        }
        const std::pair<StateId, StateId> move{*tr.settled, re.state};
        if (tr.last_anomaly != move) {
          out.anomalies.push_back(Anomaly{id, rec.object, t, move.first, move.second,
                                          "no-arc " + move.first + "→" + move.second});
          tr.last_anomaly = move;
        }
      }
      const auto tt = static_cast<std::size_t>(t);
      for (const auto& [_, tr] : tracks) {
        if (tr.in_transit || !tr.settled) {
          ++dyn.in_transit[tt];
        } else {
          ++dyn.occupancy[*tr.settled][tt];
        }
      }
    }

    for (std::size_t i = 0; i < d.partition.boundaries.size(); ++i) {
      const Tick tau = d.partition.boundaries[i];
      if (tau > horizon) break;
      const auto mu = d.mu.find(static_cast<int>(i));
      if (mu == d.mu.end() && i != 0) continue;
      const Distribution expected = over_states(d, mu == d.mu.end() ? d.initial_distribution() : mu->second);
      out.divergence[id][static_cast<int>(i)] = compare_distributions(expected, distribution_at(dyn, tau));
    }
    out.dynamics[id] = std::move(dyn);
  }
  return out;
}

}  // namespace hsgd::io
