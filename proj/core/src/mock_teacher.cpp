#include "distillplan/mock_teacher.hpp"

#include <cstdio>
#include <cstdlib>

#include "distillplan/errors.hpp"
#include "distillplan/evaluator.hpp"
#include "distillplan/hashing.hpp"

namespace distill {

namespace {

std::string hex8(std::uint64_t x) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08llx",
                static_cast<unsigned long long>(x & 0xffffffffull));
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Text of one "### Header" section, up to the next section or the end.
std::string section_text(const std::string& prompt, const std::string& header) {
  const std::string needle = "### " + header;
  const std::size_t at = prompt.find(needle);
  if (at == std::string::npos) return {};
  const std::size_t begin = at + needle.size();
  const std::size_t end = prompt.find("\n###", begin);
  return trim(end == std::string::npos ? prompt.substr(begin)
                                       : prompt.substr(begin, end - begin));
}

std::string first_line(const std::string& s) {
  const std::size_t nl = s.find('\n');
  return nl == std::string::npos ? s : s.substr(0, nl);
}

}  // namespace

std::string corrupt_answer(const std::string& answer) {
  const std::string norm = trim(answer);
  if (!norm.empty()) {
    char* end = nullptr;
    const double v = std::strtod(norm.c_str(), &end);
    if (end == norm.c_str() + norm.size()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g", v + 1.0);
      return buf;
    }
  }
  return norm + "-x";
}

std::string MockTeacherClient::complete(const std::string& prompt,
                                        const std::string& request_id) {
  const std::uint64_t seed = behavior_.seed;
  if (salted_unit(seed, "fail:", request_id) < behavior_.fail_rate)
    throw TransportError("mock transport failure for request '" + request_id +
                         "'");

  const std::uint64_t h = splitmix64(seed ^ fnv1a64(request_id));
  const std::string p8 = hex8(fnv1a64(prompt));

  if (prompt.find("### Seed examples") != std::string::npos) {
    const std::string seeds = section_text(prompt, "Seed examples");
    std::string base = first_line(seeds);
    const std::size_t q = base.find("Question: ");
    if (q != std::string::npos) base = base.substr(q + 10);
    const std::string answer = std::to_string(100 + h % 900);
    return "Question: Variant " + hex8(h) + ": " + base +
           "\nReasoning: From the seed patterns (digest " + p8 +
           "), the candidate value " + answer +
           " satisfies the family constraints." + "\nAnswer: " + answer;
  }

  if (prompt.find("### Reasoning") != std::string::npos) {
    const std::string reasoning = section_text(prompt, "Reasoning");
    const std::string shown = extract_final_answer(reasoning);
    const bool accept =
        salted_unit(seed, "accept:", request_id) < behavior_.accept_rate;
    const std::string answer = accept ? shown : corrupt_answer(shown);
    return "Reworked independently (trace " + p8 + ").\nAnswer: " + answer;
  }

  if (prompt.find("### Answer") != std::string::npos) {
    // Reverse reasoning sees the gold answer, so the bridge always lands
    // on it; acceptance is the verifier's job.
    const std::string gold = section_text(prompt, "Answer");
    return "Starting from the question, each step narrows the options "
           "(trace " +
           p8 + ") until only " + gold + " remains.\nAnswer: " + gold;
  }

  std::string gold;
  if (auto it = behavior_.answer_key.find(request_id);
      it != behavior_.answer_key.end()) {
    gold = it->second;
  } else {
    gold = "unk-" + hex8(h);
  }
  const bool correct =
      salted_unit(seed, "correct:", request_id) < behavior_.correct_rate;
  const std::string answer = correct ? gold : corrupt_answer(gold);
  return "Examining the task (trace " + p8 +
         ").\nThe final value follows from the worked steps.\nAnswer: " +
         answer;
}

}  // namespace distill
