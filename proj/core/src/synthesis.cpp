#include "distillplan/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "distillplan/catalog.hpp"
#include "distillplan/errors.hpp"
#include "distillplan/evaluator.hpp"
#include "distillplan/hashing.hpp"
#include "distillplan/parallel.hpp"
#include "distillplan/prompts.hpp"
#include "distillplan/rng.hpp"

namespace distill {

namespace {

namespace fs = std::filesystem;

// Four bytes per token over prompt and response of each completed call.
struct TokenMeter {
  std::atomic<std::uint64_t> units{0};

  void add(const std::string& prompt, const std::string& response) {
    units.fetch_add((prompt.size() + response.size() + 3) / 4,
                    std::memory_order_relaxed);
  }
};

void check_failure_budget(int failures, int attempted,
                          const SynthesisOptions& options, const char* stage) {
  if (attempted > 0 &&
      failures > options.max_failure_fraction * attempted) {
    throw TransportError(std::string(stage) + ": " + std::to_string(failures) +
                         " of " + std::to_string(attempted) +
                         " teacher calls failed");
  }
}

std::size_t find_ci(const std::string& haystack, const std::string& needle,
                    std::size_t from = 0) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    bool hit = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      char a = haystack[i + j];
      char b = needle[j];
      if (a >= 'A' && a <= 'Z') a += 'a' - 'A';
      if (b >= 'A' && b <= 'Z') b += 'a' - 'A';
      if (a != b) {
        hit = false;
        break;
      }
    }
    if (hit) return i;
  }
  return std::string::npos;
}

std::string trim_copy(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string synthetic_id(int ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn-%06d", ordinal);
  return buf;
}

struct ParsedExample {
  std::string question;
  std::string reasoning;
  std::string answer;
};

// Expansion responses carry "Question:", "Reasoning:", and "Answer:"
// markers. Returns nothing when any of the three is missing or empty.
std::optional<ParsedExample> parse_expansion(const std::string& response) {
  const std::size_t q = find_ci(response, "question:");
  if (q == std::string::npos) return std::nullopt;
  const std::size_t r = find_ci(response, "reasoning:", q);
  if (r == std::string::npos) return std::nullopt;
  const std::size_t a = find_ci(response, "answer:", r);
  if (a == std::string::npos) return std::nullopt;

  ParsedExample out;
  out.question = trim_copy(response.substr(q + 9, r - (q + 9)));
  out.reasoning = trim_copy(response.substr(r + 10, a - (r + 10)));
  out.answer = trim_copy(extract_final_answer(response));
  if (out.question.empty() || out.reasoning.empty() || out.answer.empty())
    return std::nullopt;
  return out;
}

std::string render_seed_block(std::span<const TrainingExample> seeds,
                              const std::vector<std::size_t>& picks) {
  std::string block;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const TrainingExample& ex = seeds[picks[k]];
    block += std::to_string(k + 1) + ". Question: " + ex.question +
             "\n   Answer: " + ex.answer + "\n";
  }
  return block;
}

struct TraceOutcome {
  std::optional<TrainingExample> kept;
  bool transport_failed = false;
  bool disagreed = false;
};

std::vector<TrainingExample> trace_impl(std::span<const TrainingExample> examples,
                                        TeacherClient& teacher,
                                        const SynthesisOptions& options,
                                        TokenMeter& meter, TraceStats& stats) {
  const TemplateSet& tpl = TemplateSet::builtin();
  auto outcomes = parallel_map<TraceOutcome>(
      examples.size(), options.max_in_flight, [&](std::size_t i) {
        const TrainingExample& ex = examples[i];
        TraceOutcome out;
        const std::string prompt =
            render(tpl.solve, {{"question", ex.question}});
        std::string response;
        try {
          response = teacher.complete(prompt, ex.id);
        } catch (const TransportError&) {
          out.transport_failed = true;
          return out;
        }
        meter.add(prompt, response);
        if (!match_answer(extract_final_answer(response), ex.answer)) {
          out.disagreed = true;
          return out;
        }
        TrainingExample kept = ex;
        kept.reasoning = response;
        out.kept = std::move(kept);
        return out;
      });

  stats.attempted += static_cast<int>(examples.size());
  std::vector<TrainingExample> kept;
  int failures = 0;
  for (auto& o : outcomes) {
    if (o.transport_failed) {
      ++failures;
    } else if (o.disagreed) {
      ++stats.disagreements;
    } else {
      kept.push_back(std::move(*o.kept));
    }
  }
  stats.transport_failures += failures;
  check_failure_budget(failures, static_cast<int>(examples.size()), options,
                       "alignment trace");
  return kept;
}

struct ReverseOutcome {
  std::optional<TrainingExample> candidate;
  bool transport_failed = false;
};

std::vector<TrainingExample> reverse_impl(
    std::span<const TrainingExample> examples, TeacherClient& teacher,
    const SynthesisOptions& options, TokenMeter& meter, int& transport_failures) {
  const TemplateSet& tpl = TemplateSet::builtin();
  auto outcomes = parallel_map<ReverseOutcome>(
      examples.size(), options.max_in_flight, [&](std::size_t i) {
        const TrainingExample& ex = examples[i];
        ReverseOutcome out;
        const std::string prompt = render(
            tpl.reverse, {{"question", ex.question}, {"answer", ex.answer}});
        std::string response;
        try {
          response = teacher.complete(prompt, "rev:" + ex.id);
        } catch (const TransportError&) {
          out.transport_failed = true;
          return out;
        }
        meter.add(prompt, response);
        TrainingExample candidate = ex;
        candidate.reasoning = response;
        candidate.verified = false;
        out.candidate = std::move(candidate);
        return out;
      });

  std::vector<TrainingExample> candidates;
  int failures = 0;
  for (auto& o : outcomes) {
    if (o.transport_failed) {
      ++failures;
    } else {
      candidates.push_back(std::move(*o.candidate));
    }
  }
  transport_failures += failures;
  check_failure_budget(failures, static_cast<int>(examples.size()), options,
                       "reverse trace");
  return candidates;
}

struct ExpandOutcome {
  std::optional<TrainingExample> candidate;
  bool transport_failed = false;
  bool parse_failed = false;
};

// Candidates for global ordinals [first_ordinal, first_ordinal + count).
// Ordinals are 1-based and name the candidate ids, so refill rounds
// continue the sequence.
std::vector<TrainingExample> expand_impl(std::span<const TrainingExample> seeds,
                                         int first_ordinal, int count,
                                         TeacherClient& teacher,
                                         const SynthesisOptions& options,
                                         TokenMeter& meter,
                                         ExpandStats& stats) {
  if (count <= 0) return {};
  if (seeds.empty())
    throw ValidationError("synthesis: expansion requested but no seed examples");

  const TemplateSet& tpl = TemplateSet::builtin();
  const std::size_t per_prompt = std::min<std::size_t>(
      seeds.size(), static_cast<std::size_t>(std::max(1, options.seeds_per_prompt)));

  auto outcomes = parallel_map<ExpandOutcome>(
      static_cast<std::size_t>(count), options.max_in_flight,
      [&](std::size_t i) {
        const int ordinal = first_ordinal + static_cast<int>(i);
        ExpandOutcome out;
        Rng rng(splitmix64(options.seed ^ static_cast<std::uint64_t>(ordinal)));
        const auto picks = rng.sample_indices(seeds.size(), per_prompt);
        const std::string prompt =
            render(tpl.expand, {{"seeds", render_seed_block(seeds, picks)}});
        const std::string id = synthetic_id(ordinal);
        std::string response;
        try {
          response = teacher.complete(prompt, id);
        } catch (const TransportError&) {
          out.transport_failed = true;
          return out;
        }
        meter.add(prompt, response);
        auto parsed = parse_expansion(response);
        if (!parsed) {
          out.parse_failed = true;
          return out;
        }
        TrainingExample candidate;
        candidate.id = id;
        candidate.question = parsed->question;
        candidate.answer = parsed->answer;
        candidate.reasoning = parsed->reasoning + "\nAnswer: " + parsed->answer;
        candidate.origin = Origin::synthetic;
        candidate.verified = false;
        out.candidate = std::move(candidate);
        return out;
      });

  stats.attempted += count;
  std::vector<TrainingExample> candidates;
  int failures = 0;
  for (auto& o : outcomes) {
    if (o.transport_failed) {
      ++failures;
    } else if (o.parse_failed) {
      ++stats.parse_failures;
    } else {
      candidates.push_back(std::move(*o.candidate));
    }
  }
  stats.transport_failures += failures;
  check_failure_budget(failures, count, options, "seed expansion");
  return candidates;
}

struct VerifyTally {
  std::vector<TrainingExample> accepted;
  int rejected = 0;
  int transport_failures = 0;
};

VerifyTally verify_impl(std::vector<TrainingExample> candidates,
                        TeacherClient& verifier,
                        const SynthesisOptions& options, TokenMeter& meter) {
  const TemplateSet& tpl = TemplateSet::builtin();

  enum class Vote { accepted, rejected, failed };
  auto votes = parallel_map<Vote>(
      candidates.size(), options.max_in_flight, [&](std::size_t i) {
        TrainingExample& c = candidates[i];
        const std::string prompt =
            render(tpl.verify, {{"question", c.question},
                                {"reasoning", c.reasoning.value_or("")}});
        std::string response;
        try {
          response = verifier.complete(prompt, "verify:" + c.id);
        } catch (const TransportError&) {
          return Vote::failed;
        }
        meter.add(prompt, response);
        const bool ok = match_answer(extract_final_answer(response), c.answer);
        c.verified = ok;
        return ok ? Vote::accepted : Vote::rejected;
      });

  VerifyTally tally;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    switch (votes[i]) {
      case Vote::accepted:
        tally.accepted.push_back(std::move(candidates[i]));
        break;
      case Vote::rejected:
        ++tally.rejected;
        break;
      case Vote::failed:
        ++tally.transport_failures;
        break;
    }
  }
  check_failure_budget(tally.transport_failures,
                       static_cast<int>(candidates.size()), options,
                       "verification");
  return tally;
}

void write_text_atomic(const fs::path& final_path, const std::string& content) {
  fs::path tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw ValidationError("synthesis: cannot open '" + tmp.string() +
                            "' for writing");
    out << content;
    out.flush();
    if (!out)
      throw ValidationError("synthesis: write to '" + tmp.string() +
                            "' failed");
  }
  fs::rename(tmp, final_path);
}

struct OutputGuard {
  std::vector<fs::path> paths;
  bool armed = true;

  ~OutputGuard() {
    if (!armed) return;
    for (const auto& p : paths) {
      std::error_code ec;
      fs::remove(p, ec);
      fs::path tmp = p;
      tmp += ".tmp";
      fs::remove(tmp, ec);
    }
  }
};

}  // namespace

const char* to_string(TrainMethod m) {
  switch (m) {
    case TrainMethod::sft_lora:
      return "sft_lora";
    case TrainMethod::grpo:
      return "grpo";
  }
  return "unknown";
}

std::vector<TrainingExample> extract_alignment_traces(
    std::span<const TrainingExample> examples, TeacherClient& teacher,
    const SynthesisOptions& options, TraceStats* stats) {
  TokenMeter meter;
  TraceStats local;
  auto kept = trace_impl(examples, teacher, options, meter, local);
  if (stats) *stats = local;
  return kept;
}

std::string reverse_reason(const TrainingExample& example,
                           TeacherClient& teacher,
                           const SynthesisOptions& options) {
  (void)options;
  const TemplateSet& tpl = TemplateSet::builtin();
  const std::string prompt = render(
      tpl.reverse,
      {{"question", example.question}, {"answer", example.answer}});
  return teacher.complete(prompt, "rev:" + example.id);
}

std::vector<TrainingExample> synthesize_from_seeds(
    std::span<const TrainingExample> seeds, int count, TeacherClient& teacher,
    const SynthesisOptions& options, ExpandStats* stats) {
  TokenMeter meter;
  ExpandStats local;
  auto out = expand_impl(seeds, 1, count, teacher, options, meter, local);
  if (stats) *stats = local;
  return out;
}

bool verify_example(TrainingExample& candidate, TeacherClient& verifier) {
  if (!candidate.reasoning || candidate.reasoning->empty())
    throw ValidationError("verification: candidate '" + candidate.id +
                          "' has no reasoning to check");
  const TemplateSet& tpl = TemplateSet::builtin();
  const std::string prompt =
      render(tpl.verify, {{"question", candidate.question},
                          {"reasoning", *candidate.reasoning}});
  const std::string response =
      verifier.complete(prompt, "verify:" + candidate.id);
  const bool ok = match_answer(extract_final_answer(response), candidate.answer);
  candidate.verified = ok;
  return ok;
}

StrategyRunResult run_strategy(const StrategyRunContext& ctx,
                               std::span<const TrainingExample> dataset,
                               TeacherClient& teacher,
                               TeacherClient& verifier) {
  if (dataset.empty()) throw ValidationError("synthesis: dataset is empty");
  if (ctx.out_dir.empty()) throw ValidationError("synthesis: out_dir is empty");
  if (ctx.synthetic_count < 0)
    throw ValidationError("synthesis: synthetic_count is negative");
  if (ctx.target_total < 0)
    throw ValidationError("synthesis: target_total is negative");

  fs::create_directories(ctx.out_dir);
  const fs::path dataset_path = ctx.out_dir / "dataset.jsonl";
  const fs::path report_path = ctx.out_dir / "synthesis_report.json";
  const fs::path job_path = ctx.out_dir / "training_job.json";

  OutputGuard guard;
  guard.paths = {dataset_path, report_path, job_path};

  const TemplateSet& tpl = TemplateSet::builtin();
  TokenMeter meter;
  SynthesisReport report;
  report.output_path = dataset_path.string();

  std::set<std::string> input_ids;
  for (const auto& ex : dataset) input_ids.insert(ex.id);

  std::vector<TrainingExample> rows;
  int requested = 0;

  // Synthetic candidates for ordinals starting at `next_ordinal`, verified
  // and refilled while the regeneration budget lasts.
  int next_ordinal = 1;
  auto expand_and_verify = [&](int want) {
    std::vector<TrainingExample> accepted;
    int rounds_left = 1 + std::max(0, ctx.options.regeneration_budget);
    int missing = want;
    while (missing > 0 && rounds_left > 0) {
      --rounds_left;
      ExpandStats estats;
      auto candidates = expand_impl(dataset, next_ordinal, missing, teacher,
                                    ctx.options, meter, estats);
      next_ordinal += missing;
      report.transport_failures += estats.transport_failures;
      report.generated += static_cast<int>(candidates.size());
      for (const auto& c : candidates) {
        if (input_ids.count(c.id))
          throw ValidationError("synthesis: generated id '" + c.id +
                                "' collides with an input example");
      }
      auto tally =
          verify_impl(std::move(candidates), verifier, ctx.options, meter);
      report.verifier_rejected += tally.rejected;
      report.transport_failures += tally.transport_failures;
      for (auto& c : tally.accepted) accepted.push_back(std::move(c));
      missing = want - static_cast<int>(accepted.size());
    }
    report.verified_accepted += static_cast<int>(accepted.size());
    return accepted;
  };

  if (ctx.strategy == Strategy::injection) {
    requested = ctx.synthetic_count;

    int reverse_failures = 0;
    auto traced =
        reverse_impl(dataset, teacher, ctx.options, meter, reverse_failures);
    report.transport_failures += reverse_failures;
    report.generated += static_cast<int>(traced.size());

    auto traced_tally =
        verify_impl(std::move(traced), verifier, ctx.options, meter);
    report.verified_accepted += static_cast<int>(traced_tally.accepted.size());
    report.verifier_rejected += traced_tally.rejected;
    report.transport_failures += traced_tally.transport_failures;
    rows = std::move(traced_tally.accepted);

    auto synth = expand_and_verify(requested);
    for (auto& c : synth) rows.push_back(std::move(c));

    report.template_ids = {tpl.reverse.id};
    if (requested > 0) report.template_ids.push_back(tpl.expand.id);
    report.template_ids.push_back(tpl.verify.id);
  } else {
    requested = ctx.target_total > 0
                    ? std::max(0, ctx.target_total -
                                      static_cast<int>(dataset.size()))
                    : 0;

    TraceStats tstats;
    auto kept = trace_impl(dataset, teacher, ctx.options, meter, tstats);
    report.transport_failures += tstats.transport_failures;
    report.generated += tstats.attempted - tstats.transport_failures;
    report.verified_accepted += static_cast<int>(kept.size());
    report.verifier_rejected += tstats.disagreements;
    rows = std::move(kept);

    auto synth = expand_and_verify(requested);
    for (auto& c : synth) rows.push_back(std::move(c));

    report.template_ids = {tpl.solve.id};
    if (requested > 0) {
      report.template_ids.push_back(tpl.expand.id);
      report.template_ids.push_back(tpl.verify.id);
    }
  }

  report.requested = requested;
  report.token_spend_estimate = meter.units.load();

  if (rows.empty())
    throw InfeasibleError("synthesis",
                          "no training examples survived the acceptance gate");

  TrainingJobDescriptor job;
  job.method = ctx.strategy == Strategy::injection ? TrainMethod::sft_lora
                                                   : ctx.alignment_method;
  job.student_id = ctx.student_id;
  job.server_id = ctx.server_id;
  job.dataset_path = dataset_path.string();
  job.hyperparams = ctx.hyperparams;

  {
    std::ostringstream lines;
    for (const auto& ex : rows) {
      lines << to_json(ex).dump() << "\n";
    }
    write_text_atomic(dataset_path, lines.str());
  }
  write_text_atomic(report_path, to_json(report).dump(2) + "\n");
  write_text_atomic(job_path, to_json(job).dump(2) + "\n");
  guard.armed = false;

  StrategyRunResult result;
  result.dataset_path = dataset_path;
  result.report = std::move(report);
  result.job = std::move(job);
  return result;
}

nlohmann::json to_json(const SynthesisReport& report) {
  return nlohmann::json{
      {"requested", report.requested},
      {"generated", report.generated},
      {"verified_accepted", report.verified_accepted},
      {"verifier_rejected", report.verifier_rejected},
      {"transport_failures", report.transport_failures},
      {"token_spend_estimate", report.token_spend_estimate},
      {"output_path", report.output_path},
      {"template_ids", report.template_ids},
      {"verifier_votes", report.verifier_votes},
  };
}

nlohmann::json to_json(const TrainingJobDescriptor& job) {
  return nlohmann::json{
      {"method", to_string(job.method)},
      {"student_id", job.student_id},
      {"server_id", job.server_id},
      {"dataset_path", job.dataset_path},
      {"hyperparams", job.hyperparams},
  };
}

}  // namespace distill
