#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace distill {

struct ServerSpec {
  std::string id;
  std::string region;
  std::string gpu_model;
  int gpu_count = 1;
  double vram_gb = 0;       // aggregate across all GPUs
  double fp16_tflops = 0;   // aggregate across all GPUs
  double mem_bw_gbps = 0;   // aggregate across all GPUs
  double hourly_cost_usd = 0;
  double rtt_ms = 0;        // user to server round trip

  bool operator==(const ServerSpec&) const = default;
};

enum class ModelRole { teacher, student };

struct EvalRecord {
  std::string task_id;
  double accuracy = 0;  // fraction in [0, 1]
  int sample_count = 0;
  bool with_teacher_cot = false;  // measured with teacher reasoning injected

  bool operator==(const EvalRecord&) const = default;
};

struct ModelSpec {
  std::string id;
  ModelRole role = ModelRole::student;
  double params_b = 0;  // parameter count in billions
  std::optional<double> min_vram_gb;           // required for students
  std::optional<double> api_cost_per_mtok_usd; // required for teachers
  double bytes_per_param = 2.0;
  std::vector<EvalRecord> eval_records;

  bool operator==(const ModelSpec&) const = default;

  // First record matching both the task and the measurement flavor.
  const EvalRecord* find_eval(const std::string& task_id,
                              bool with_teacher_cot) const {
    for (const auto& r : eval_records) {
      if (r.task_id == task_id && r.with_teacher_cot == with_teacher_cot)
        return &r;
    }
    return nullptr;
  }
};

// Minimum acceptable server profile. Absent fields default to zero, which
// every valid server satisfies.
struct HardwareFloor {
  int gpu_count = 0;
  double vram_gb = 0;
  double fp16_tflops = 0;
  double mem_bw_gbps = 0;

  bool operator==(const HardwareFloor&) const = default;
};

struct PlanRequest {
  std::string task_id;
  double accuracy_threshold = 0;  // minimum acceptable task accuracy
  double tps_floor = 1;           // minimum decode throughput, tokens/s
  double train_time_cap_h = 1;    // maximum budgeted training time, hours
  double weight_accuracy = 1;     // student score weight on accuracy
  double weight_train_time = 1;   // student score weight on training time
  double weight_tps = 1;          // student score weight on throughput
  double cost_window_usd = 1;     // grid interval width on hourly cost
  std::optional<HardwareFloor> hardware_floor;
  int sample_size = 32;           // task subset size for teacher probing
  // Strategy cut: teacher sample accuracy at or above this yields
  // knowledge alignment. Falls back to accuracy_threshold when unset.
  std::optional<double> alignment_threshold;
  std::uint64_t seed = 0;

  bool operator==(const PlanRequest&) const = default;
};

enum class Origin { real, synthetic };

struct TrainingExample {
  std::string id;
  std::string question;
  std::string answer;
  std::optional<std::string> reasoning;
  Origin origin = Origin::real;
  bool verified = false;

  bool operator==(const TrainingExample&) const = default;
};

}  // namespace distill
