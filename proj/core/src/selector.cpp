#include "distillplan/selector.hpp"

#include <algorithm>

#include "distillplan/errors.hpp"

namespace distill {

namespace {

double normalize(double v, double lo, double hi) {
  if (hi <= lo) return 0.5;
  return (v - lo) / (hi - lo);
}

const EvalRecord& require_eval(const ModelSpec& m, const std::string& task_id,
                               bool with_cot, const char* stage) {
  const EvalRecord* r = m.find_eval(task_id, with_cot);
  if (!r)
    throw ValidationError(std::string(stage) + ": model '" + m.id +
                          "' has no eval record for task '" + task_id +
                          (with_cot ? "' with teacher reasoning"
                                    : "' without teacher reasoning"));
  return *r;
}

}  // namespace

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::below_accuracy_threshold:
      return "below_accuracy_threshold";
    case RejectReason::exceeds_memory:
      return "exceeds_memory";
    case RejectReason::exceeds_time_cap:
      return "exceeds_time_cap";
    case RejectReason::below_tps_floor:
      return "below_tps_floor";
  }
  return "unknown";
}

const char* to_string(Strategy s) {
  return s == Strategy::alignment ? "alignment" : "injection";
}

const ModelSpec& select_teacher(std::span<const ModelSpec> teachers,
                                const std::string& task_id,
                                double accuracy_threshold) {
  if (teachers.empty())
    throw ValidationError("teacher_selection: empty teacher pool");

  auto better = [](const ModelSpec& a, const ModelSpec& b) {
    const double ca = *a.api_cost_per_mtok_usd;
    const double cb = *b.api_cost_per_mtok_usd;
    if (ca != cb) return ca < cb;
    return a.id < b.id;
  };

  const ModelSpec* cheapest_qualifying = nullptr;
  const ModelSpec* most_accurate = nullptr;
  double best_accuracy = -1;
  for (const auto& t : teachers) {
    const EvalRecord& r =
        require_eval(t, task_id, false, "teacher_selection");
    if (r.accuracy >= accuracy_threshold) {
      if (!cheapest_qualifying || better(t, *cheapest_qualifying))
        cheapest_qualifying = &t;
    }
    if (r.accuracy > best_accuracy ||
        (r.accuracy == best_accuracy && better(t, *most_accurate))) {
      most_accurate = &t;
      best_accuracy = r.accuracy;
    }
  }
  return cheapest_qualifying ? *cheapest_qualifying : *most_accurate;
}

std::vector<CandidateScore> filter_students(
    std::span<const ModelSpec> students, const std::string& task_id,
    const ServerSpec& server, const PlanRequest& request,
    std::uint64_t dataset_tokens, const EstimatorConfig& estimator) {
  std::vector<CandidateScore> out;
  out.reserve(students.size());
  for (const auto& m : students) {
    const EvalRecord& r =
        require_eval(m, task_id, true, "student_selection");
    const ResourceEstimate est =
        estimate_pair(m, server, dataset_tokens, estimator);
    CandidateScore c;
    c.model_id = m.id;
    c.accuracy = r.accuracy;
    c.train_time_h = est.train_time_h;
    c.tps = est.tokens_per_s;
    if (r.accuracy < request.accuracy_threshold) {
      c.rejected_reason = RejectReason::below_accuracy_threshold;
    } else if (!est.fits_memory) {
      c.rejected_reason = RejectReason::exceeds_memory;
    } else if (est.train_time_h > request.train_time_cap_h) {
      c.rejected_reason = RejectReason::exceeds_time_cap;
    } else if (est.tokens_per_s < request.tps_floor) {
      c.rejected_reason = RejectReason::below_tps_floor;
    }
    out.push_back(std::move(c));
  }
  return out;
}

void score_students(std::vector<CandidateScore>& survivors,
                    const PlanRequest& request) {
  if (survivors.empty()) return;
  double acc_lo = survivors[0].accuracy, acc_hi = acc_lo;
  double t_lo = survivors[0].train_time_h, t_hi = t_lo;
  double r_lo = survivors[0].tps, r_hi = r_lo;
  for (const auto& c : survivors) {
    acc_lo = std::min(acc_lo, c.accuracy);
    acc_hi = std::max(acc_hi, c.accuracy);
    t_lo = std::min(t_lo, c.train_time_h);
    t_hi = std::max(t_hi, c.train_time_h);
    r_lo = std::min(r_lo, c.tps);
    r_hi = std::max(r_hi, c.tps);
  }
  for (auto& c : survivors) {
    NormalizedMetrics n;
    n.accuracy = normalize(c.accuracy, acc_lo, acc_hi);
    n.train_time = normalize(c.train_time_h, t_lo, t_hi);
    n.tps = normalize(c.tps, r_lo, r_hi);
    c.normalized = n;
    c.score = request.weight_accuracy * n.accuracy +
              request.weight_train_time * (1.0 - n.train_time) +
              request.weight_tps * n.tps;
  }
  std::sort(survivors.begin(), survivors.end(),
            [](const CandidateScore& a, const CandidateScore& b) {
              if (*a.score != *b.score) return *a.score > *b.score;
              return a.model_id < b.model_id;
            });
}

std::pair<ModelSpec, std::vector<CandidateScore>> select_student(
    std::span<const ModelSpec> students, const std::string& task_id,
    const ServerSpec& server, const PlanRequest& request,
    std::uint64_t dataset_tokens, const EstimatorConfig& estimator) {
  if (students.empty())
    throw ValidationError("student_selection: empty student pool");

  std::vector<CandidateScore> audit = filter_students(
      students, task_id, server, request, dataset_tokens, estimator);

  std::vector<CandidateScore> survivors;
  for (const auto& c : audit) {
    if (!c.rejected()) survivors.push_back(c);
  }
  if (survivors.empty())
    throw InfeasibleError("student_selection",
                          "no student satisfies the request constraints");
  score_students(survivors, request);

  for (auto& c : audit) {
    for (const auto& s : survivors) {
      if (s.model_id == c.model_id) {
        c = s;
        break;
      }
    }
  }

  const std::string& winner_id = survivors.front().model_id;
  const ModelSpec* winner = nullptr;
  for (const auto& m : students) {
    if (m.id == winner_id) {
      winner = &m;
      break;
    }
  }
  return {*winner, std::move(audit)};
}

StrategyDecision decide_strategy(double teacher_sample_accuracy,
                                 const PlanRequest& request) {
  StrategyDecision d;
  d.teacher_sample_accuracy = teacher_sample_accuracy;
  d.threshold_used =
      request.alignment_threshold.value_or(request.accuracy_threshold);
  d.strategy = teacher_sample_accuracy >= d.threshold_used
                   ? Strategy::alignment
                   : Strategy::injection;
  return d;
}

}  // namespace distill
