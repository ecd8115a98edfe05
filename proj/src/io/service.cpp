#include "hsgd/io/service.hpp"

#include "hsgd/error.hpp"
#include "hsgd/io/export.hpp"
#include "hsgd/planner.hpp"

namespace hsgd::io {

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

Json parse_body(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return Json::object();
  Json v = Json::parse(body.begin(), body.end(), nullptr, false);
  if (v.is_discarded() || !v.is_object()) throw HttpError{400, "bad_request", "request body must be a JSON object"};
  return v;
}

template <class T>
std::optional<T> opt(const Json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  try {
    return body.at(key).get<T>();
  } catch (const Json::exception&) {
    throw HttpError{400, "bad_request", std::string("field '") + key + "' has the wrong type"};
  }
}

Tick horizon_arg(const Json& body, std::optional<Tick> fallback) {
  const auto h = opt<Tick>(body, "horizon");
  if (!h && !fallback) throw HttpError{400, "bad_request", "horizon is required"};
  const Tick v = h.value_or(fallback.value_or(0));
  if (v < 1) throw HttpError{400, "bad_request", "horizon must be at least 1"};
  return v;
}

int status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::model_mismatch:
    case ErrorCode::trajectory_model_mismatch:
      return 409;
    case ErrorCode::assembly_rejected:
    case ErrorCode::inconsistent_state:
      return 422;
    default:
      return 400;
  }
}

}  // namespace

std::shared_ptr<const Service::Loaded> Service::snapshot() const {
  std::lock_guard lock(mutex_);
  return loaded_;
}

std::string Service::model_hash() const {
  const auto s = snapshot();
  return s ? s->hash : std::string();
}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  const auto snap = snapshot();
  Response r;
  try {
    if (path == "/model") {
      if (method == "GET") {
        r = get_model();
      } else if (method == "POST") {
        r = post_model(body);
      } else {
        throw HttpError{405, "method_not_allowed", "use GET or POST"};
      }
    } else if (path == "/run" || path == "/inertial" || path == "/plan" || path == "/compare") {
      if (method != "POST") throw HttpError{405, "method_not_allowed", "use POST"};
      if (path == "/run") r = post_run(body);
      if (path == "/inertial") r = post_inertial(body);
      if (path == "/plan") r = post_plan(body);
      if (path == "/compare") r = post_compare(body);
    } else {
      throw HttpError{404, "not_found", "no endpoint " + std::string(path)};
    }
    return r;
  } catch (const HttpError& e) {
    Json out{{"error", e.code}, {"message", e.message}, {"engine_version", engine_version()}};
    out["model_hash"] = snap ? Json(snap->hash) : Json(nullptr);
    return Response{e.status, canonical_dump(out)};
  } catch (const Error& e) {
    Json out{{"error", std::string(to_string(e.code()))}, {"message", e.what()}, {"engine_version", engine_version()}};
    out["model_hash"] = snap ? Json(snap->hash) : Json(nullptr);
    return Response{status_of(e.code()), canonical_dump(out)};
  } catch (const std::exception& e) {
    Json out{{"error", "internal"}, {"message", e.what()}, {"engine_version", engine_version()}};
    out["model_hash"] = snap ? Json(snap->hash) : Json(nullptr);
    return Response{500, canonical_dump(out)};
  }
}

Response Service::get_model() const {
  const auto snap = snapshot();
  if (!snap) throw HttpError{404, "no_model", "no model loaded"};
  Json diagrams = Json::array();
  for (const auto& d : snap->doc.diagrams) {
    Json arcs = Json::array();
    for (const auto& a : d.arcs) {
      arcs.push_back(Json{{"id", a.id},
                          {"source", a.source},
                          {"target", a.target},
                          {"kind", a.kind == ArcKind::forward ? "forward" : "backstep"},
                          {"transit", a.transit}});
    }
    diagrams.push_back(Json{{"id", d.id},
                            {"population", d.population},
                            {"horizon", d.partition.horizon()},
                            {"partition", d.partition.boundaries},
                            {"states", d.states_by_rank()},
                            {"initial", d.initial},
                            {"final", d.final_state},
                            {"arcs", arcs}});
  }
  Json symbols = Json::array();
  for (const auto& s : snap->doc.rule.symbols) {
    symbols.push_back(Json{{"id", s.id},
                           {"class", s.symbol_class == SymbolClass::general ? "general" : "individual"},
                           {"arc", s.arc.str()},
                           {"cost", s.cost}});
  }
  Json scenarios = Json::array();
  for (const auto& s : snap->doc.scenarios) {
    scenarios.push_back(Json{{"id", s.id}, {"horizon", s.horizon}, {"schedule", schedule_to_json(s.schedule)}});
  }
  Json rule_bases = Json::array();
  for (const auto& [d, _] : snap->doc.rules) rule_bases.push_back(d);
  Json out{{"engine_version", engine_version()},
           {"model_hash", snap->hash},
           {"levels", snap->model.levels},
           {"diagrams", diagrams},
           {"symbols", symbols},
           {"scenarios", scenarios},
           {"rule_bases", rule_bases}};
  return Response{200, canonical_dump(out)};
}

Response Service::post_model(std::string_view text) {
  const auto parsed = parse_model(text);
  Json out{{"engine_version", engine_version()}};
  if (!parsed.ok()) {
    out["ok"] = false;
    out["diagnostics"] = to_json(parsed.diagnostics);
    out["model_hash"] = model_hash().empty() ? Json(nullptr) : Json(model_hash());
    return Response{422, canonical_dump(out)};
  }
  const auto report = validate_document(*parsed.document);
  if (!report.ok()) {
    out["ok"] = false;
    out["issues"] = to_json(report)["issues"];
    out["model_hash"] = model_hash().empty() ? Json(nullptr) : Json(model_hash());
    return Response{422, canonical_dump(out)};
  }
  auto loaded = std::make_shared<Loaded>();
  loaded->doc = *parsed.document;
  loaded->model = assemble_document(loaded->doc);
  loaded->hash = io::model_hash(loaded->doc);
  {
    std::lock_guard lock(mutex_);
    loaded_ = loaded;
  }
  out["ok"] = true;
  out["model_hash"] = loaded->hash;
  return Response{200, canonical_dump(out)};
}

Response Service::post_run(std::string_view body_text) {
  const auto snap = snapshot();
  if (!snap) throw HttpError{404, "no_model", "no model loaded"};
  const Json body = parse_body(body_text);

  ControlScenario sc;
  if (const auto id = opt<std::string>(body, "scenario")) {
    const auto* found = snap->doc.find_scenario(*id);
    if (!found) throw HttpError{404, "unknown_scenario", "no scenario " + *id};
    sc = *found;
    sc.horizon = horizon_arg(body, sc.horizon);
  } else {
    if (!body.contains("schedule")) throw HttpError{400, "bad_request", "give a scenario id or an inline schedule"};
    try {
      sc.schedule = schedule_from_json(body.at("schedule"));
    } catch (const Error& e) {
      throw HttpError{400, "bad_request", e.what()};
    }
    sc.id = opt<std::string>(body, "id").value_or("inline");
    sc.priority = opt<int>(body, "priority").value_or(0);
    sc.horizon = horizon_arg(body, std::nullopt);
  }
  sc.model = snap->hash;
  try {
    const auto trajectory = run(snap->model, sc);
    const auto report = evaluate(trajectory, sc);
    {
      std::lock_guard lock(mutex_);
      reports_[sc.id] = report;
    }
    Json out{{"engine_version", engine_version()}, {"model_hash", snap->hash}, {"report_id", sc.id},
             {"report", to_json(report)},          {"trajectory", to_json(trajectory)}};
    return Response{200, canonical_dump(out)};
  } catch (const Error& e) {
    throw HttpError{status_of(e.code()), std::string(to_string(e.code())), e.what()};
  }
}

Response Service::post_inertial(std::string_view body_text) {
  const auto snap = snapshot();
  if (!snap) throw HttpError{404, "no_model", "no model loaded"};
  const Json body = parse_body(body_text);
  ControlScenario sc;
  sc.id = "inertial";
  sc.model = snap->hash;
  sc.horizon = horizon_arg(body, std::nullopt);
  try {
    auto trajectory = run_inertial(snap->model, sc.horizon);
    trajectory.model = snap->hash;
    const auto report = evaluate(trajectory, sc);
    Json out{{"engine_version", engine_version()}, {"model_hash", snap->hash}, {"report", to_json(report)},
             {"trajectory", to_json(trajectory)}};
    return Response{200, canonical_dump(out)};
  } catch (const Error& e) {
    throw HttpError{status_of(e.code()), std::string(to_string(e.code())), e.what()};
  }
}

Response Service::post_plan(std::string_view body_text) {
  const auto snap = snapshot();
  if (!snap) throw HttpError{404, "no_model", "no model loaded"};
  const Json body = parse_body(body_text);
  const auto from = opt<std::string>(body, "from");
  const auto to = opt<std::string>(body, "to");
  if (!from || !to) throw HttpError{400, "bad_request", "from and to are required"};
  auto diagram = opt<std::string>(body, "diagram");
  if (!diagram) {
    if (snap->doc.rules.size() != 1) throw HttpError{400, "bad_request", "name the diagram whose rules to use"};
    diagram = snap->doc.rules.begin()->first;
  }
  const auto base = snap->doc.rules.find(*diagram);
  if (base == snap->doc.rules.end()) throw HttpError{404, "no_rules", "no rule base for diagram " + *diagram};
  Budgets budgets;
  if (body.contains("budgets")) {
    const Json& b = body.at("budgets");
    if (!b.is_object()) throw HttpError{400, "bad_request", "budgets must be an object"};
    budgets.resource = opt<double>(b, "resource");
    budgets.time = opt<Tick>(b, "time");
  }
  try {
    const auto plans = enumerate_plans(base->second, *from, *to, budgets);
    Json out{{"engine_version", engine_version()}, {"model_hash", snap->hash}, {"diagram", *diagram},
             {"plans", to_json(plans)}};
    return Response{200, canonical_dump(out)};
  } catch (const Error& e) {
    throw HttpError{status_of(e.code()), std::string(to_string(e.code())), e.what()};
  }
}

Response Service::post_compare(std::string_view body_text) {
  const Json body = parse_body(body_text);
  std::vector<ScenarioReport> reports;
  if (body.contains("reports")) {
    if (!body.at("reports").is_array()) throw HttpError{400, "bad_request", "reports must be a list"};
    for (const auto& r : body.at("reports")) {
      try {
        reports.push_back(report_from_json(r));
      } catch (const Error& e) {
        throw HttpError{400, "bad_request", e.what()};
      }
    }
  }
  for (const auto& id : opt<std::vector<std::string>>(body, "report_ids").value_or(std::vector<std::string>{})) {
    std::lock_guard lock(mutex_);
    const auto it = reports_.find(id);
    if (it == reports_.end()) throw HttpError{404, "missing_report", "no stored report " + id};
    reports.push_back(it->second);
  }
  if (reports.empty()) throw HttpError{400, "bad_request", "give report_ids or reports"};
  try {
    const auto ranking = compare(reports);
    Json out{{"engine_version", engine_version()}, {"ranking", to_json(ranking)}};
    out["model_hash"] = model_hash().empty() ? Json(nullptr) : Json(model_hash());
    return Response{200, canonical_dump(out)};
  } catch (const Error& e) {
    throw HttpError{status_of(e.code()), std::string(to_string(e.code())), e.what()};
  }
}

}  // namespace hsgd::io
