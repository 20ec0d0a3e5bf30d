#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "distillplan/teacher_client.hpp"
#include "distillplan/types.hpp"

// Answer matching, endpoint probing, and strategy-level scoring.

namespace distill {

struct EvalOutcome {
  std::string task_id;
  std::string model_id;
  int n = 0;
  int correct = 0;
  double accuracy = 0;

  bool operator==(const EvalOutcome&) const = default;
};

// One strategy row in a comparison table. Metrics other than accuracy are
// minimized.
struct StrategyMetrics {
  std::string name;
  double accuracy = 0;      // percent or fraction, used consistently
  double latency_ms = 0;
  double cost_usd = 0;
  double train_time_h = 0;
  double overall = 0;       // filled by score_overall
};

// The final answer span of a model response: the text after the last
// "Answer:" marker (case-insensitive), or the last non-empty line when no
// marker is present.
std::string extract_final_answer(const std::string& response);

// Trimmed, case-folded, inner whitespace collapsed.
std::string normalize_answer(const std::string& raw);

// Equality on normalized spans. When both parse fully as numbers the
// comparison is numeric with 1e-6 relative tolerance.
bool match_answer(const std::string& response, const std::string& gold);

struct ProbeOptions {
  int max_in_flight = 8;
  // Fraction of failed calls above which the whole probe is abandoned.
  double max_failure_fraction = 0.5;
};

// Asks the endpoint to solve each example and scores the final answers
// against gold. Transport failures are skipped and counted against
// max_failure_fraction; n counts only scored examples.
EvalOutcome probe_accuracy(TeacherClient& client, const std::string& model_id,
                           const std::string& task_id,
                           std::span<const TrainingExample> samples,
                           const ProbeOptions& options = {});

// Min-max normalizes each column over the rows (zero spread maps to 0.5)
// and fills row.overall with
//   w0*acc + w1*(1-latency) + w2*(1-cost) + w3*(1-train_time).
// Requires at least two rows.
void score_overall(std::vector<StrategyMetrics>& rows,
                   const std::array<double, 4>& weights = {0.25, 0.25, 0.25,
                                                           0.25});

}  // namespace distill
