#include "distillplan/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "distillplan/errors.hpp"
#include "distillplan/parallel.hpp"
#include "distillplan/prompts.hpp"

namespace distill {

namespace {

// Last case-insensitive occurrence of "answer:".
std::size_t find_last_marker(const std::string& text) {
  static constexpr const char* kMarker = "answer:";
  std::size_t found = std::string::npos;
  for (std::size_t i = 0; i + 7 <= text.size(); ++i) {
    bool hit = true;
    for (std::size_t j = 0; j < 7; ++j) {
      if (std::tolower(static_cast<unsigned char>(text[i + j])) != kMarker[j]) {
        hit = false;
        break;
      }
    }
    if (hit) found = i;
  }
  return found;
}

std::string last_non_empty_line(const std::string& text) {
  std::size_t end = text.size();
  while (end > 0) {
    std::size_t begin = text.rfind('\n', end - 1);
    const std::size_t line_begin = begin == std::string::npos ? 0 : begin + 1;
    std::string line = text.substr(line_begin, end - line_begin);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    if (begin == std::string::npos) break;
    end = begin;
  }
  return {};
}

bool parse_full_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

double column_normalize(double v, double lo, double hi) {
  if (hi <= lo) return 0.5;
  return (v - lo) / (hi - lo);
}

}  // namespace

std::string extract_final_answer(const std::string& response) {
  const std::size_t at = find_last_marker(response);
  std::string span;
  if (at != std::string::npos) {
    span = response.substr(at + 7);
    const std::size_t nl = span.find('\n');
    if (nl != std::string::npos) span = span.substr(0, nl);
  } else {
    span = last_non_empty_line(response);
  }
  return span;
}

std::string normalize_answer(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool in_space = true;  // swallow leading whitespace
  for (unsigned char c : raw) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

bool match_answer(const std::string& response, const std::string& gold) {
  const std::string a = normalize_answer(extract_final_answer(response));
  const std::string b = normalize_answer(gold);
  double av = 0, bv = 0;
  if (parse_full_number(a, &av) && parse_full_number(b, &bv)) {
    if (av == bv) return true;
    return std::abs(av - bv) <= 1e-6 * std::max(std::abs(av), std::abs(bv));
  }
  return a == b;
}

EvalOutcome probe_accuracy(TeacherClient& client, const std::string& model_id,
                           const std::string& task_id,
                           std::span<const TrainingExample> samples,
                           const ProbeOptions& options) {
  if (samples.empty())
    throw ValidationError("probe: empty sample set for task '" + task_id +
                          "'");
  const PromptTemplate& solve = TemplateSet::builtin().solve;

  struct Outcome {
    bool ok = false;
    bool correct = false;
  };
  auto outcomes = parallel_map<Outcome>(
      samples.size(), options.max_in_flight, [&](std::size_t i) -> Outcome {
        const TrainingExample& ex = samples[i];
        try {
          const std::string response = client.complete(
              render(solve, {{"question", ex.question}}), ex.id);
          return {true, match_answer(response, ex.answer)};
        } catch (const TransportError&) {
          return {false, false};
        }
      });

  int failed = 0, correct = 0, scored = 0;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++failed;
      continue;
    }
    ++scored;
    if (o.correct) ++correct;
  }
  if (failed > options.max_failure_fraction *
                   static_cast<double>(samples.size()))
    throw TransportError("probe: " + std::to_string(failed) + " of " +
                         std::to_string(samples.size()) +
                         " teacher calls failed");
  EvalOutcome out;
  out.task_id = task_id;
  out.model_id = model_id;
  out.n = scored;
  out.correct = correct;
  out.accuracy = scored == 0 ? 0.0 : static_cast<double>(correct) / scored;
  return out;
}

void score_overall(std::vector<StrategyMetrics>& rows,
                   const std::array<double, 4>& weights) {
  if (rows.size() < 2)
    throw ValidationError(
        "score_overall: needs at least two rows to normalize");
  double acc_lo = rows[0].accuracy, acc_hi = acc_lo;
  double lat_lo = rows[0].latency_ms, lat_hi = lat_lo;
  double cost_lo = rows[0].cost_usd, cost_hi = cost_lo;
  double time_lo = rows[0].train_time_h, time_hi = time_lo;
  for (const auto& r : rows) {
    acc_lo = std::min(acc_lo, r.accuracy);
    acc_hi = std::max(acc_hi, r.accuracy);
    lat_lo = std::min(lat_lo, r.latency_ms);
    lat_hi = std::max(lat_hi, r.latency_ms);
    cost_lo = std::min(cost_lo, r.cost_usd);
    cost_hi = std::max(cost_hi, r.cost_usd);
    time_lo = std::min(time_lo, r.train_time_h);
    time_hi = std::max(time_hi, r.train_time_h);
  }
  for (auto& r : rows) {
    const double acc = column_normalize(r.accuracy, acc_lo, acc_hi);
    const double lat = column_normalize(r.latency_ms, lat_lo, lat_hi);
    const double cost = column_normalize(r.cost_usd, cost_lo, cost_hi);
    const double time = column_normalize(r.train_time_h, time_lo, time_hi);
    r.overall = weights[0] * acc + weights[1] * (1.0 - lat) +
                weights[2] * (1.0 - cost) + weights[3] * (1.0 - time);
  }
}

}  // namespace distill
