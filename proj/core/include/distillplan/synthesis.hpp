#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "distillplan/selector.hpp"
#include "distillplan/teacher_client.hpp"
#include "distillplan/types.hpp"

// Data synthesis for the two distillation strategies.
//
// Knowledge alignment asks the teacher to solve each real example and
// keeps only traces whose final answer agrees with gold. Knowledge
// injection asks the teacher to reason backwards from question and gold
// answer, optionally synthesizes fresh examples from seed batches, and
// gates every candidate through an independent verifier that sees the
// question and reasoning but never the candidate's answer.

namespace distill {

struct SynthesisOptions {
  int max_in_flight = 8;
  std::uint64_t seed = 0;       // drives seed-batch picking for expansion
  int seeds_per_prompt = 4;
  // Extra generation rounds allowed to refill verifier-rejected synthetic
  // candidates. Zero means rejected candidates are simply discarded.
  int regeneration_budget = 0;
  // Fraction of failed calls above which a whole stage is abandoned.
  double max_failure_fraction = 0.5;
};

struct TraceStats {
  int attempted = 0;
  int transport_failures = 0;
  int disagreements = 0;
};

struct ExpandStats {
  int attempted = 0;
  int transport_failures = 0;
  int parse_failures = 0;
};

// Teacher solves each example; traces whose final answer disagrees with
// gold are dropped. Kept examples carry the trace as reasoning, in input
// order, with ids, answers, origin, and verified flag untouched.
std::vector<TrainingExample> extract_alignment_traces(
    std::span<const TrainingExample> examples, TeacherClient& teacher,
    const SynthesisOptions& options = {}, TraceStats* stats = nullptr);

// Reasoning text bridging the example's question to its gold answer.
std::string reverse_reason(const TrainingExample& example,
                           TeacherClient& teacher,
                           const SynthesisOptions& options = {});

// `count` fresh examples patterned on seed batches, ids syn-000001...,
// origin synthetic, verified false (verification is a separate gate).
// Unparseable responses are skipped and counted.
std::vector<TrainingExample> synthesize_from_seeds(
    std::span<const TrainingExample> seeds, int count, TeacherClient& teacher,
    const SynthesisOptions& options = {}, ExpandStats* stats = nullptr);

// Asks the verifier to solve the candidate's question given its reasoning
// (the answer itself is withheld) and accepts iff the verifier's final
// answer matches. Sets candidate.verified and returns the outcome.
bool verify_example(TrainingExample& candidate, TeacherClient& verifier);

struct SynthesisReport {
  int requested = 0;           // synthetic candidates asked for
  int generated = 0;           // candidates that reached the acceptance gate
  int verified_accepted = 0;
  int verifier_rejected = 0;
  int transport_failures = 0;  // calls lost after retries, all stages
  std::uint64_t token_spend_estimate = 0;
  std::string output_path;
  std::vector<std::string> template_ids;
  int verifier_votes = 1;      // single greedy verifier vote
};

enum class TrainMethod { sft_lora, grpo };

const char* to_string(TrainMethod m);

struct TrainingJobDescriptor {
  TrainMethod method = TrainMethod::sft_lora;
  std::string student_id;
  std::string server_id;
  std::string dataset_path;
  std::map<std::string, double> hyperparams;
};

struct StrategyRunContext {
  Strategy strategy = Strategy::alignment;
  std::string task_id;
  std::string student_id;
  std::string server_id;
  // Injection: fresh synthetic candidates to generate.
  int synthetic_count = 0;
  // Alignment: grow the emitted dataset toward this many rows; the
  // request is target_total minus the input size. Zero disables
  // expansion.
  int target_total = 0;
  TrainMethod alignment_method = TrainMethod::sft_lora;
  std::map<std::string, double> hyperparams;
  std::filesystem::path out_dir;
  SynthesisOptions options;
};

struct StrategyRunResult {
  std::filesystem::path dataset_path;
  SynthesisReport report;
  TrainingJobDescriptor job;
};

// Runs the full stage for the decided strategy and writes dataset.jsonl,
// synthesis_report.json, and training_job.json under out_dir. Outputs are
// written atomically; on failure nothing partial is left behind.
// Injection always trains with the adapter method; alignment uses
// ctx.alignment_method.
StrategyRunResult run_strategy(const StrategyRunContext& ctx,
                               std::span<const TrainingExample> dataset,
                               TeacherClient& teacher,
                               TeacherClient& verifier);

nlohmann::json to_json(const SynthesisReport& report);
nlohmann::json to_json(const TrainingJobDescriptor& job);

}  // namespace distill
