#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "distillplan/pipeline.hpp"

// A small planning service around the pipeline: health probe, plan
// endpoint, and catalog reload. The HTTP layer stays out of this header
// so consumers of the core library never pull it in.

namespace distill {

struct ServicePaths {
  std::filesystem::path fleet;
  std::filesystem::path zoo;
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> config;
};

class PlanningService {
 public:
  // Loads the catalog files eagerly; throws on any load failure.
  explicit PlanningService(ServicePaths paths);
  ~PlanningService();

  PlanningService(const PlanningService&) = delete;
  PlanningService& operator=(const PlanningService&) = delete;

  // Re-reads the catalog files and swaps the snapshot in one step.
  // In-flight requests keep the snapshot they started with.
  void reload();

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Returns the bound port.
  int start(const std::string& host, int port);
  void stop();
  // Blocks until the server stops.
  void wait();

  // Transport-independent request handling, also used by the HTTP layer.
  // Returns status code and response body.
  std::pair<int, std::string> handle_plan(const std::string& body) const;
  std::pair<int, std::string> handle_reload();
  std::string health() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace distill
