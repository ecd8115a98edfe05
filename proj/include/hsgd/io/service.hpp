#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "hsgd/engine.hpp"
#include "hsgd/io/dsl.hpp"

namespace hsgd::io {

struct Response {
  int status = 200;
  std::string body;  // canonical JSON
};

// Request handlers behind the HTTP endpoints. Each request works on the
// model snapshot current when it started; POST /model swaps the snapshot.
class Service {
 public:
  // GET/POST /model, POST /run, /inertial, /plan, /compare. Never throws;
  // failures come back as a status with an {"error", "message"} body.
  Response handle(std::string_view method, std::string_view path, std::string_view body);

  std::string model_hash() const;

 private:
  Response get_model() const;
  Response post_model(std::string_view text);
  Response post_run(std::string_view body);
  Response post_inertial(std::string_view body);
  Response post_plan(std::string_view body);
  Response post_compare(std::string_view body);

  struct Loaded {
    ModelDocument doc;
    HsgdModel model;
    std::string hash;
  };

  std::shared_ptr<const Loaded> snapshot() const;

  mutable std::mutex mutex_;
  std::shared_ptr<const Loaded> loaded_;
  std::map<std::string, ScenarioReport> reports_;  // by report id
};

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hsgd::io
