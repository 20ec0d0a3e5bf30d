#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "distillplan/estimator.hpp"
#include "distillplan/types.hpp"

// Teacher choice, student filtering and scoring, and the strategy
// decision.

namespace distill {

// Rejection checks run in this order; the first hit is recorded.
enum class RejectReason {
  below_accuracy_threshold,
  exceeds_memory,
  exceeds_time_cap,
  below_tps_floor,
};

const char* to_string(RejectReason reason);

struct NormalizedMetrics {
  double accuracy = 0;
  double train_time = 0;
  double tps = 0;

  bool operator==(const NormalizedMetrics&) const = default;
};

struct CandidateScore {
  std::string model_id;
  double accuracy = 0;      // task accuracy with teacher reasoning injected
  double train_time_h = 0;
  double tps = 0;
  std::optional<NormalizedMetrics> normalized;  // survivors only
  std::optional<double> score;                  // survivors only
  std::optional<RejectReason> rejected_reason;

  bool rejected() const { return rejected_reason.has_value(); }
  bool operator==(const CandidateScore&) const = default;
};

enum class Strategy { alignment, injection };

const char* to_string(Strategy s);

struct StrategyDecision {
  Strategy strategy = Strategy::alignment;
  double teacher_sample_accuracy = 0;
  double threshold_used = 0;

  bool operator==(const StrategyDecision&) const = default;
};

// Among teachers meeting the accuracy threshold on the task, the cheapest
// per-token one wins; if none qualify, the most accurate one does. Ties
// break toward lower cost, then ascending id. Teacher accuracy is the
// record measured without injected reasoning.
const ModelSpec& select_teacher(std::span<const ModelSpec> teachers,
                                const std::string& task_id,
                                double accuracy_threshold);

// One entry per student, in input order. Checks run accuracy, memory,
// time cap, throughput floor; survivors carry their raw metrics and no
// rejection reason.
std::vector<CandidateScore> filter_students(
    std::span<const ModelSpec> students, const std::string& task_id,
    const ServerSpec& server, const PlanRequest& request,
    std::uint64_t dataset_tokens, const EstimatorConfig& estimator = {});

// Min-max normalizes each metric over the given survivors (a metric with
// zero spread maps to 0.5 for everyone), combines them as
//   weight_accuracy * acc + weight_train_time * (1 - time) + weight_tps * tps,
// and sorts descending by score with ties broken by ascending id.
void score_students(std::vector<CandidateScore>& survivors,
                    const PlanRequest& request);

// Filter + score. Returns the winning student and the full audit list
// (all candidates in input order, survivors carrying scores). Throws
// InfeasibleError when nothing survives.
std::pair<ModelSpec, std::vector<CandidateScore>> select_student(
    std::span<const ModelSpec> students, const std::string& task_id,
    const ServerSpec& server, const PlanRequest& request,
    std::uint64_t dataset_tokens, const EstimatorConfig& estimator = {});

// Knowledge alignment when the probed teacher accuracy reaches the
// threshold (alignment_threshold if set, accuracy_threshold otherwise;
// boundary inclusive), knowledge injection below it.
StrategyDecision decide_strategy(double teacher_sample_accuracy,
                                 const PlanRequest& request);

}  // namespace distill
