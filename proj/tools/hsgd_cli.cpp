#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hsgd/error.hpp"
#include "hsgd/io/dsl.hpp"
#include "hsgd/io/export.hpp"
#include "hsgd/io/monitoring.hpp"
#include "hsgd/io/service.hpp"
#include "hsgd/planner.hpp"

using namespace hsgd;
using namespace hsgd::io;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Exit {
  int code;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << path << "\n";
    throw Exit{kUsage};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& bytes, const std::string& out) {
  if (out.empty()) {
    std::cout << bytes;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) {
    std::cerr << "cannot write " << out << "\n";
    throw Exit{kUsage};
  }
  f << bytes;
}

ModelDocument parse_or_exit(const std::string& path) {
  auto parsed = parse_model(slurp(path));
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) std::cerr << path << ":" << format_diagnostic(d) << "\n";
    throw Exit{kFailed};
  }
  return std::move(*parsed.document);
}

void print_issues(const ValidationReport& report) {
  for (const auto& i : report.issues) std::cerr << i.code << ": " << i.message << "\n";
}

struct Loaded {
  ModelDocument doc;
  HsgdModel model;
  std::string hash;
};

Loaded load(const std::string& path) {
  Loaded l{parse_or_exit(path), {}, {}};
  const auto report = validate_document(l.doc);
  if (!report.ok()) {
    print_issues(report);
    throw Exit{kFailed};
  }
  l.model = assemble_document(l.doc);
  l.hash = model_hash(l.doc);
  return l;
}

void check_horizon(const std::optional<Tick>& h) {
  if (h && *h < 1) {
    std::cerr << "--horizon must be at least 1\n";
    throw Exit{kUsage};
  }
}

std::string report_file(const ScenarioReport& report, const std::string& hash) {
  Json out = to_json(report);
  out["engine_version"] = engine_version();
  out["model_hash"] = hash;
  return canonical_dump(out);
}

int cmd_validate(const std::string& path) {
  const auto doc = parse_or_exit(path);
  const auto report = validate_document(doc);
  if (!report.ok()) {
    print_issues(report);
    return kFailed;
  }
  std::cout << "ok " << model_hash(doc) << "\n";
  return kOk;
}

int cmd_run(const std::string& path, const std::string& scenario, std::optional<Tick> horizon,
            const std::string& out) {
  check_horizon(horizon);
  const auto l = load(path);
  const auto* found = l.doc.find_scenario(scenario);
  if (!found) {
    std::cerr << "no scenario " << scenario << "\n";
    return kUsage;
  }
  auto sc = *found;
  if (horizon) sc.horizon = *horizon;
  sc.model = l.hash;
  const auto report = evaluate(run(l.model, sc), sc);
  emit(report_file(report, l.hash), out);
  return kOk;
}

int cmd_inertial(const std::string& path, Tick horizon, const std::string& out) {
  check_horizon(horizon);
  const auto l = load(path);
  ControlScenario sc;
  sc.id = "inertial";
  sc.model = l.hash;
  sc.horizon = horizon;
  auto trajectory = run_inertial(l.model, horizon);
  trajectory.model = l.hash;
  emit(report_file(evaluate(trajectory, sc), l.hash), out);
  return kOk;
}

int cmd_ingest(const std::string& path, const std::string& csv) {
  const auto l = load(path);
  const auto records = read_monitoring_csv(slurp(csv));
  Json out = to_json(ingest_monitoring(records, l.model, l.doc.scales));
  out["engine_version"] = engine_version();
  out["model_hash"] = l.hash;
  std::cout << canonical_dump(out);
  return kOk;
}

int cmd_plan(const std::string& path, const std::string& from, const std::string& to, std::optional<double> resource,
             std::optional<Tick> time, std::optional<std::string> diagram) {
  const auto l = load(path);
  if (!diagram) {
    if (l.doc.rules.size() != 1) {
      std::cerr << "the model has " << l.doc.rules.size() << " rule bases; pick one with --diagram\n";
      return kUsage;
    }
    diagram = l.doc.rules.begin()->first;
  }
  const auto base = l.doc.rules.find(*diagram);
  if (base == l.doc.rules.end()) {
    std::cerr << "no rule base for diagram " << *diagram << "\n";
    return kUsage;
  }
  const auto plans = enumerate_plans(base->second, from, to, Budgets{resource, time});
  Json out{{"engine_version", engine_version()}, {"model_hash", l.hash}, {"diagram", *diagram},
           {"plans", to_json(plans)}};
  std::cout << canonical_dump(out);
  return plans.empty() ? kFailed : kOk;
}

int cmd_compare(const std::vector<std::string>& files) {
  std::vector<ScenarioReport> reports;
  for (const auto& f : files) {
    const Json v = Json::parse(slurp(f), nullptr, false);
    if (v.is_discarded()) {
      std::cerr << f << ": not JSON\n";
      return kFailed;
    }
    reports.push_back(report_from_json(v));
  }
  Json out{{"engine_version", engine_version()}, {"ranking", to_json(compare(reports))}};
  std::cout << canonical_dump(out);
  return kOk;
}

int cmd_serve(const std::string& host, int port, const std::string& model) {
  Service service;
  if (!model.empty()) {
    const auto r = service.handle("POST", "/model", slurp(model));
    if (r.status != 200) {
      std::cerr << r.body;
      return kFailed;
    }
  }
  HttpServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return kUsage;
  }
  std::cerr << "listening on " << host << ":" << bound << "\n";
  return server.listen() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical state-graph dynamics toolkit"};
  app.require_subcommand(1);

  std::string model;
  std::string out;
  std::string scenario;
  std::optional<Tick> horizon;
  Tick inertial_horizon = 0;
  std::string csv;
  std::string from;
  std::string to;
  std::optional<double> max_resource;
  std::optional<Tick> max_time;
  std::optional<std::string> diagram;
  std::vector<std::string> reports;
  std::string host = "127.0.0.1";
  int port = 8080;

  auto* validate = app.add_subcommand("validate", "Parse and validate a model");
  validate->add_option("model", model, "Model file")->required();

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its report");
  run_cmd->add_option("model", model, "Model file")->required();
  run_cmd->add_option("--scenario", scenario, "Scenario id")->required();
  run_cmd->add_option("--horizon", horizon, "Override the scenario horizon");
  run_cmd->add_option("--out", out, "Report file (default stdout)");

  auto* inertial = app.add_subcommand("inertial", "Run with no control symbols");
  inertial->add_option("model", model, "Model file")->required();
  inertial->add_option("--horizon", inertial_horizon, "Ticks to simulate")->required();
  inertial->add_option("--out", out, "Report file (default stdout)");

  auto* ingest = app.add_subcommand("ingest", "Rebuild actual dynamics from monitoring data");
  ingest->add_option("model", model, "Model file")->required();
  ingest->add_option("csv", csv, "Monitoring CSV")->required();

  auto* plan = app.add_subcommand("plan", "Enumerate Pareto-optimal rule chains");
  plan->add_option("model", model, "Model file")->required();
  plan->add_option("--from", from, "Start state")->required();
  plan->add_option("--to", to, "Goal state")->required();
  plan->add_option("--max-resource", max_resource, "Resource budget");
  plan->add_option("--max-time", max_time, "Time budget");
  plan->add_option("--diagram", diagram, "Rule base to search");

  auto* cmp = app.add_subcommand("compare", "Rank scenario reports");
  cmp->add_option("reports", reports, "Report files")->required();

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", port, "Port (0 picks a free one)")->required();
  serve->add_option("--host", host, "Address to bind");
  serve->add_option("--model", model, "Model to load at start");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(model);
    if (*run_cmd) return cmd_run(model, scenario, horizon, out);
    if (*inertial) return cmd_inertial(model, inertial_horizon, out);
    if (*ingest) return cmd_ingest(model, csv);
    if (*plan) return cmd_plan(model, from, to, max_resource, max_time, diagram);
    if (*cmp) return cmd_compare(reports);
    if (*serve) return cmd_serve(host, port, model);
  } catch (const Exit& e) {
    return e.code;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}
