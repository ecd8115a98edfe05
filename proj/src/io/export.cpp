#include "hsgd/io/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hsgd/error.hpp"

#ifndef HSGD_ENGINE_VERSION
#define HSGD_ENGINE_VERSION "hsgd-engine/1.0.0"
#endif

namespace hsgd::io {

namespace {

void dump(const Json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann objects are std::map backed, so iteration is key-sorted.
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += inner;
        dump(e, out, indent + 1);
      }
      out += flat ? "]" : "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", d);
      // Values that round to zero print without a sign.
      std::string s = buf;
      if (s == "-0.000000") s = "0.000000";
      out += s;
      return;
    }
    default:
      out += v.dump();
  }
}

Json stats_json(const ScenarioStats& s) {
  return Json{{"forward_completions", s.forward_completions}, {"coupled_completions", s.coupled_completions},
              {"backsteps", s.backsteps},
              {"omitted_backsteps", s.omitted_backsteps},
              {"redundancy", s.redundancy},
              {"resource", s.resource}};
}

template <class T>
T field(const Json& v, const char* key) {
  if (!v.is_object() || !v.contains(key)) {
    throw Error(ErrorCode::parse_failure, std::string("report is missing '") + key + "'");
  }
  try {
    return v.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::parse_failure, std::string("report field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string engine_version() { return HSGD_ENGINE_VERSION; }

std::string canonical_dump(const Json& value) {
  std::string out;
  dump(value, out, 0);
  out += '\n';
  return out;
}

Json to_json(const ScenarioReport& r) {
  Json goals = Json::object();
  for (const auto& [d, t] : r.goal_times) goals[d] = t ? Json(*t) : Json(nullptr);
  Json div = Json::object();
  for (const auto& [d, per] : r.divergence) {
    Json m = Json::object();
    for (const auto& [i, v] : per) m[std::to_string(i)] = v;
    div[d] = m;
  }
  return Json{{"scenario", r.scenario},
              {"model", r.model},
              {"complete", r.complete},
              {"redundancy_count", r.redundancy_count},
              {"omitted_ratio", r.omitted_ratio},
              {"complexness", r.complexness},
              {"goal_times", goals},
              {"resource_total", r.resource_total},
              {"divergence", div},
              {"priority", r.priority},
              {"quality", r.quality}};
}

ScenarioReport report_from_json(const Json& v) {
  ScenarioReport r;
  r.scenario = field<std::string>(v, "scenario");
  r.model = field<std::string>(v, "model");
  r.complete = field<bool>(v, "complete");
  r.redundancy_count = field<Count>(v, "redundancy_count");
  r.omitted_ratio = field<double>(v, "omitted_ratio");
  r.complexness = field<double>(v, "complexness");
  r.resource_total = field<double>(v, "resource_total");
  r.priority = field<int>(v, "priority");
  r.quality = field<double>(v, "quality");
  const Json goals = field<Json>(v, "goal_times");
  for (auto it = goals.begin(); it != goals.end(); ++it) {
    r.goal_times[it.key()] = it.value().is_null() ? std::nullopt : std::optional<Tick>(it.value().get<Tick>());
  }
  const Json div = field<Json>(v, "divergence");
  for (auto it = div.begin(); it != div.end(); ++it) {
    for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
      r.divergence[it.key()][std::stoi(jt.key())] = jt.value().get<double>();
    }
  }
  return r;
}

Json schedule_to_json(const TimeDiagram& schedule) {
  Json out = Json::object();
  for (const auto& [t, syms] : schedule) out[std::to_string(t)] = Json(std::vector<std::string>(syms.begin(), syms.end()));
  return out;
}

TimeDiagram schedule_from_json(const Json& value) {
  if (!value.is_object()) throw Error(ErrorCode::parse_failure, "schedule must map ticks to symbol lists");
  TimeDiagram out;
  for (auto it = value.begin(); it != value.end(); ++it) {
    Tick t = 0;
    try {
      std::size_t used = 0;
      t = std::stoll(it.key(), &used);
      if (used != it.key().size()) throw std::invalid_argument("tick");
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse_failure, "schedule key '" + it.key() + "' is not a tick");
    }
    if (!it.value().is_array()) throw Error(ErrorCode::parse_failure, "schedule entries must be symbol lists");
    for (const auto& s : it.value()) {
      if (!s.is_string()) throw Error(ErrorCode::parse_failure, "schedule symbols must be strings");
      out[t].insert(s.get<std::string>());
    }
  }
  return out;
}

Json to_json(const Trajectory& tr) {
  Json diagrams = Json::object();
  for (const auto& [id, d] : tr.diagrams) {
    Json occ = Json::object();
    for (const auto& [s, series] : d.dynamics.occupancy) occ[s] = series;
    Json eta = Json::object();
    for (const auto& [a, series] : d.dynamics.eta) eta[a] = series;
    Json applied = Json::array();
    for (const auto& u : d.applied) applied.push_back(std::vector<std::string>(u.begin(), u.end()));
    diagrams[id] = Json{{"partition", d.partition.boundaries},
                        {"states", d.states},
                        {"initial", d.initial},
                        {"final", d.final_state},
                        {"population", d.population},
                        {"occupancy", occ},
                        {"in_transit", d.dynamics.in_transit},
                        {"eta", eta},
                        {"applied", applied},
                        {"cumulative_cost", d.cumulative_cost}};
  }
  Json events = Json::array();
  for (const auto& e : tr.events) {
    events.push_back(Json{{"tick", e.tick},
                          {"kind", std::string(to_string(e.kind))},
                          {"diagram", e.diagram},
                          {"arc", e.arc},
                          {"symbol", e.symbol},
                          {"objects", e.objects},
                          {"arrival", e.arrival}});
  }
  return Json{{"scenario", tr.scenario}, {"model", tr.model},   {"horizon", tr.horizon},
              {"diagrams", diagrams},    {"events", events},    {"stats", stats_json(tr.stats)}};
}

Json to_json(const ValidationReport& report) {
  Json issues = Json::array();
  for (const auto& i : report.issues) {
    issues.push_back(Json{{"code", i.code}, {"message", i.message}, {"subjects", i.subjects}});
  }
  return Json{{"ok", report.ok()}, {"issues", issues}};
}

Json to_json(std::span<const Diagnostic> diagnostics) {
  Json out = Json::array();
  for (const auto& d : diagnostics) {
    out.push_back(Json{{"code", d.code}, {"message", d.message}, {"line", d.location.line}, {"column", d.location.column}});
  }
  return out;
}

Json to_json(std::span<const Plan> plans) {
  Json out = Json::array();
  for (const auto& p : plans) {
    out.push_back(Json{{"rules", p.rule_ids()},
                       {"total_resource", p.total_resource},
                       {"total_time", p.total_time},
                       {"states", p.states},
                       {"schedule", schedule_to_json(plan_to_time_diagram(p, 0))}});
  }
  return out;
}

Json to_json(std::span<const RankedReport> ranking) {
  Json out = Json::array();
  for (const auto& r : ranking) out.push_back(Json{{"scenario", r.scenario}, {"layer", r.layer}});
  return out;
}

Json to_json(const IngestResult& result) {
  Json dyn = Json::object();
  for (const auto& [id, d] : result.dynamics) {
    Json occ = Json::object();
    for (const auto& [s, series] : d.occupancy) occ[s] = series;
    Json eta = Json::object();
    for (const auto& [a, series] : d.eta) eta[a] = series;
    dyn[id] = Json{{"population", d.population}, {"occupancy", occ}, {"in_transit", d.in_transit}, {"eta", eta}};
  }
  Json anomalies = Json::array();
  for (const auto& a : result.anomalies) {
    anomalies.push_back(Json{{"diagram", a.diagram},
                             {"object", a.object},
                             {"tick", a.tick},
                             {"from", a.from},
                             {"to", a.to},
                             {"message", a.message}});
  }
  Json flags = Json::array();
  for (const auto& f : result.flags) {
    flags.push_back(Json{{"diagram", f.diagram},
                         {"object", f.object},
                         {"tick", f.tick},
                         {"gap_hold", f.flags.gap_hold},
                         {"rank_jump", f.flags.rank_jump}});
  }
  Json div = Json::object();
  for (const auto& [d, per] : result.divergence) {
    Json m = Json::object();
    for (const auto& [i, v] : per) m[std::to_string(i)] = v;
    div[d] = m;
  }
  return Json{{"dynamics", dyn}, {"anomalies", anomalies}, {"flags", flags}, {"divergence", div}};
}

Json to_json(const ObjectivesReport& report) {
  return Json{{"achieved", report.achieved}, {"unmet_leaves", report.unmet_leaves}, {"root_achieved", report.root_achieved}};
}

std::string export_report(const ScenarioReport& report) { return canonical_dump(to_json(report)); }

std::string export_trajectory(const Trajectory& trajectory) { return canonical_dump(to_json(trajectory)); }

}  // namespace hsgd::io
