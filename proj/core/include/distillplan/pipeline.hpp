#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "distillplan/estimator.hpp"
#include "distillplan/plan.hpp"
#include "distillplan/synthesis.hpp"
#include "distillplan/teacher_client.hpp"
#include "distillplan/types.hpp"

// Configuration, fleet simulation, endpoint wiring, and the end-to-end
// planning entry point.

namespace distill {

// Deterministic stand-in for a live endpoint. Per-model solve rates
// resolve in order: an explicit entry in `rates`, the model's recorded
// task accuracy without teacher reasoning, then `default_rate`.
struct MockConfig {
  bool enabled = true;
  std::uint64_t seed = 1234;
  double default_rate = 1.0;
  std::map<std::string, double> rates;
  double verifier_accept_rate = 1.0;
  double fail_rate = 0;
};

// Live endpoint settings; the environment supplies defaults via
// TEACHER_ENDPOINT_URL, TEACHER_API_KEY, and TEACHER_MODEL.
struct EndpointConfig {
  std::string base_url;
  std::string api_key;
  std::string model;  // overrides the zoo model id when set
};

struct SynthesisConfig {
  int max_in_flight = 8;
  int seeds_per_prompt = 4;
  int regeneration_budget = 0;
  int synthetic_count = 4000;  // injection: fresh candidates to generate
  int target_total = 0;        // alignment: dataset size goal, 0 disables
};

struct TrainingConfig {
  TrainMethod alignment_method = TrainMethod::sft_lora;
  std::map<std::string, double> hyperparams = {
      {"epochs", 3},
      {"learning_rate", 2e-4},
      {"lora_alpha", 32},
      {"lora_rank", 16},
  };
};

// Catalog file locations, used by long-running entry points that load
// their own inputs (the service does; one-shot commands take paths on the
// command line).
struct PathsConfig {
  std::string fleet;
  std::string zoo;
  std::string dataset;
};

struct PipelineConfig {
  EstimatorConfig estimator;
  MockConfig mock;
  EndpointConfig endpoint;
  SynthesisConfig synthesis;
  TrainingConfig training;
  PathsConfig paths;
  std::array<double, 4> overall_weights{0.25, 0.25, 0.25, 0.25};

  // Reads the keys present in `j` over the defaults; unknown keys are
  // rejected, partial documents are fine.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

// Overlay drawn from the process environment, shaped like a config
// document. Empty when none of the variables are set.
nlohmann::json env_config_overlay();

// Recursive object merge; overlay values win.
void merge_config(nlohmann::json& base, const nlohmann::json& overlay);

struct GpuProfile {
  std::string gpu_model;
  int gpu_count = 1;
  double vram_gb = 0;
  double fp16_tflops = 0;
  double mem_bw_gbps = 0;
  double cost_lo = 0, cost_hi = 0;  // hourly USD
  double rtt_lo = 0, rtt_hi = 0;    // ms
};

struct FleetGenSpec {
  int count = 20;
  std::uint64_t seed = 0;
  std::vector<GpuProfile> profiles;
  std::vector<std::string> regions;

  static FleetGenSpec defaults();
};

// Deterministic synthetic fleet: ids srv-0001..., profile and region
// drawn per server, cost and latency uniform within the profile's range.
std::vector<ServerSpec> generate_fleet(const FleetGenSpec& spec);

// ceil(bytes / 4) per example over question, answer, and reasoning.
std::uint64_t dataset_token_estimate(std::span<const TrainingExample> dataset);

// Client factories honoring the mock switch. The mock path never touches
// the network; the live path requires endpoint.base_url.
TeacherClientFactory make_teacher_factory(
    const PipelineConfig& config, std::span<const ModelSpec> zoo,
    const std::string& task_id, std::span<const TrainingExample> dataset);

// The verifier runs on a shifted seed so its decisions are independent of
// the teacher's even for identical request ids.
TeacherClientFactory make_verifier_factory(const PipelineConfig& config);

struct PlanInputs {
  std::vector<ServerSpec> fleet;
  std::vector<ModelSpec> zoo;
  std::vector<TrainingExample> dataset;
  PlanRequest request;
};

// Full pipeline: validate, pick the server, pick the teacher, probe its
// sampled accuracy, decide the strategy, pick the student, and assemble
// the plan document with its audit trail.
DeploymentPlan plan(const PlanInputs& inputs, const PipelineConfig& config);
DeploymentPlan plan(const PlanInputs& inputs, const PipelineConfig& config,
                    const TeacherClientFactory& teacher_factory);

// Synthesis stage for an existing plan; writes outputs under out_dir.
StrategyRunResult run_plan_synthesis(const DeploymentPlan& plan,
                                     std::span<const TrainingExample> dataset,
                                     const PipelineConfig& config,
                                     const std::filesystem::path& out_dir);

}  // namespace distill
