#include "distillplan/estimator.hpp"

namespace distill {

bool fits_memory(const ModelSpec& student, const ServerSpec& server) {
  const double need = student.min_vram_gb.value_or(0.0);
  return need <= server.vram_gb;
}

double estimate_train_time_h(const ModelSpec& student, const ServerSpec& server,
                             std::uint64_t dataset_tokens,
                             const EstimatorConfig& cfg) {
  const double params = student.params_b * 1e9;
  const double flops =
      6.0 * params * static_cast<double>(dataset_tokens) * cfg.adapter_factor;
  const double flops_per_s = cfg.utilization * server.fp16_tflops * 1e12;
  return flops / flops_per_s / 3600.0;
}

double estimate_tps(const ModelSpec& student, const ServerSpec& server) {
  if (!fits_memory(student, server)) return 0.0;
  const double weight_bytes = student.params_b * 1e9 * student.bytes_per_param;
  return server.mem_bw_gbps * 1e9 / weight_bytes;
}

ResourceEstimate estimate_pair(const ModelSpec& student,
                               const ServerSpec& server,
                               std::uint64_t dataset_tokens,
                               const EstimatorConfig& cfg) {
  ResourceEstimate e;
  e.fits_memory = fits_memory(student, server);
  e.train_time_h = estimate_train_time_h(student, server, dataset_tokens, cfg);
  e.tokens_per_s = estimate_tps(student, server);
  e.train_cost_usd = e.train_time_h * server.hourly_cost_usd;
  return e;
}

}  // namespace distill
