#include "distillplan/service.hpp"

#include <mutex>
#include <thread>

#include <httplib.h>

#include "distillplan/catalog.hpp"
#include "distillplan/errors.hpp"

namespace distill {

namespace {

std::string error_body(const std::string& kind, const std::string& message,
                       const std::string& stage = {}) {
  nlohmann::json e{{"kind", kind}, {"message", message}};
  if (!stage.empty()) e["stage"] = stage;
  return nlohmann::json{{"error", e}}.dump(2) + "\n";
}

struct Snapshot {
  std::vector<ServerSpec> fleet;
  std::vector<ModelSpec> zoo;
  std::vector<TrainingExample> dataset;
  PipelineConfig config;
};

std::shared_ptr<const Snapshot> load_snapshot(const ServicePaths& paths) {
  auto s = std::make_shared<Snapshot>();
  s->fleet = load_fleet(paths.fleet);
  s->zoo = load_model_zoo(paths.zoo);
  s->dataset = load_dataset(paths.dataset);
  if (paths.config) s->config = PipelineConfig::load(*paths.config);
  return s;
}

}  // namespace

struct PlanningService::Impl {
  ServicePaths paths;
  mutable std::mutex mu;
  std::shared_ptr<const Snapshot> snapshot;
  httplib::Server server;
  std::thread listener;
  bool started = false;

  std::shared_ptr<const Snapshot> current() const {
    std::lock_guard<std::mutex> lock(mu);
    return snapshot;
  }
};

PlanningService::PlanningService(ServicePaths paths)
    : impl_(std::make_unique<Impl>()) {
  impl_->paths = std::move(paths);
  impl_->snapshot = load_snapshot(impl_->paths);
}

PlanningService::~PlanningService() { stop(); }

void PlanningService::reload() {
  auto fresh = load_snapshot(impl_->paths);
  std::lock_guard<std::mutex> lock(impl_->mu);
  impl_->snapshot = std::move(fresh);
}

std::string PlanningService::health() const {
  return nlohmann::json{{"status", "ok"}}.dump(2) + "\n";
}

std::pair<int, std::string> PlanningService::handle_plan(
    const std::string& body) const {
  auto snap = impl_->current();
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded())
    return {400, error_body("parse_error", "request body: malformed JSON")};
  try {
    PlanInputs inputs{snap->fleet, snap->zoo, snap->dataset,
                      request_from_json(j)};
    const DeploymentPlan p = plan(inputs, snap->config);
    return {200, plan_document_json(p)};
  } catch (const InfeasibleError& ex) {
    return {422, error_body("infeasible", ex.what(), ex.stage())};
  } catch (const ParseError& ex) {
    return {400, error_body("parse_error", ex.what())};
  } catch (const ValidationError& ex) {
    return {400, error_body("invalid_input", ex.what())};
  } catch (const TransportError& ex) {
    return {502, error_body("upstream_unavailable", ex.what())};
  }
}

std::pair<int, std::string> PlanningService::handle_reload() {
  try {
    reload();
    return {200, nlohmann::json{{"status", "reloaded"}}.dump(2) + "\n"};
  } catch (const ParseError& ex) {
    return {400, error_body("parse_error", ex.what())};
  } catch (const ValidationError& ex) {
    return {400, error_body("invalid_input", ex.what())};
  }
}

int PlanningService::start(const std::string& host, int port) {
  auto& server = impl_->server;
  server.Get("/health",
             [this](const httplib::Request&, httplib::Response& res) {
               res.set_content(health(), "application/json");
             });
  server.Post("/v1/plan",
              [this](const httplib::Request& req, httplib::Response& res) {
                auto [status, body] = handle_plan(req.body);
                res.status = status;
                res.set_content(body, "application/json");
              });
  server.Post("/v1/reload",
              [this](const httplib::Request&, httplib::Response& res) {
                auto [status, body] = handle_reload();
                res.status = status;
                res.set_content(body, "application/json");
              });

  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
    if (bound < 0)
      throw TransportError("service: cannot bind a port on " + host);
  } else {
    if (!server.bind_to_port(host, port))
      throw TransportError("service: cannot bind " + host + ":" +
                           std::to_string(port));
  }
  impl_->listener = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  impl_->started = true;
  return bound;
}

void PlanningService::stop() {
  if (!impl_) return;
  if (impl_->started) impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  impl_->started = false;
}

void PlanningService::wait() {
  if (impl_->listener.joinable()) impl_->listener.join();
}

}  // namespace distill
