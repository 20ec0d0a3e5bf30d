#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "distillplan/teacher_client.hpp"

// Deterministic stand-in for a live endpoint. Every response is a pure
// function of (seed, request id, prompt hash); behavior decisions depend
// only on (seed, salt, request id) through salted_unit() so tests can
// recompute them without replaying prompts:
//
//   fail     when salted_unit(seed, "fail:",    id) < fail_rate
//   correct  when salted_unit(seed, "correct:", id) < correct_rate
//   accept   when salted_unit(seed, "accept:",  id) < accept_rate
//
// The response shape follows the prompt's section markers: seed-expansion
// prompts get a fresh question/reasoning/answer triple, verification
// prompts get an independent answer derived from the shown reasoning,
// reverse-reasoning prompts get a trace ending in the given answer, and
// plain solve prompts get a trace ending in the answer keyed by request
// id (or a derived wrong one).

namespace distill {

struct MockBehavior {
  std::uint64_t seed = 0;
  // Probability a solve or reverse-reasoning call lands on the gold answer.
  double correct_rate = 1.0;
  // Probability a verification call reproduces the reasoning's answer.
  double accept_rate = 1.0;
  // Probability a call throws TransportError instead of answering.
  double fail_rate = 0.0;
  // Gold answers by request id, used by solve prompts.
  std::map<std::string, std::string> answer_key;
};

class MockTeacherClient : public TeacherClient {
 public:
  explicit MockTeacherClient(MockBehavior behavior)
      : behavior_(std::move(behavior)) {}

  std::string complete(const std::string& prompt,
                       const std::string& request_id) override;

  const MockBehavior& behavior() const { return behavior_; }

 private:
  MockBehavior behavior_;
};

// A deliberately non-matching variant of an answer.
std::string corrupt_answer(const std::string& answer);

}  // namespace distill
