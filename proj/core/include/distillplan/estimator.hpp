#pragma once

#include <cstdint>

#include "distillplan/types.hpp"

// First-order resource estimates for training and serving a student on a
// server. Absolute precision is a non-goal; the planner only relies on
// the ordering these induce between candidates.

namespace distill {

struct EstimatorConfig {
  // Fraction of full-model FLOPs an adapter method actually spends.
  double adapter_factor = 0.35;
  // Fraction of peak fp16 throughput realistically sustained.
  double utilization = 0.3;
};

struct ResourceEstimate {
  double train_time_h = 0;
  double tokens_per_s = 0;
  bool fits_memory = false;
  double train_cost_usd = 0;
};

// Training VRAM floor against server VRAM, boundary inclusive.
bool fits_memory(const ModelSpec& student, const ServerSpec& server);

// Hours for one adapter-method pass: 6 * params * dataset_tokens *
// adapter_factor FLOPs at utilization * peak fp16 throughput.
double estimate_train_time_h(const ModelSpec& student, const ServerSpec& server,
                             std::uint64_t dataset_tokens,
                             const EstimatorConfig& cfg = {});

// Bandwidth-bound decode throughput: bytes/s over the weight footprint.
// Zero when the student does not fit the server's memory.
double estimate_tps(const ModelSpec& student, const ServerSpec& server);

ResourceEstimate estimate_pair(const ModelSpec& student,
                               const ServerSpec& server,
                               std::uint64_t dataset_tokens,
                               const EstimatorConfig& cfg = {});

}  // namespace distill
