#include <map>
#include <string>
#include <vector>

#include "distillplan/errors.hpp"
#include "distillplan/evaluator.hpp"
#include "distillplan/hashing.hpp"
#include "distillplan/mock_teacher.hpp"
#include "doctest.h"

using namespace distill;

TEST_CASE("final answer extraction") {
  CHECK(extract_final_answer("steps here\nAnswer: 42") == " 42");
  CHECK(extract_final_answer("Answer: 1\nmore\nANSWER: 2\nrest") == " 2");
  CHECK(extract_final_answer("answer:7") == "7");
  CHECK(extract_final_answer("no marker\nfinal line") == "final line");
  CHECK(extract_final_answer("text\n\n  \n") == "text");
  CHECK(extract_final_answer("") == "");
}

TEST_CASE("answer normalization") {
  CHECK(normalize_answer("  Foo   Bar  ") == "foo bar");
  CHECK(normalize_answer("\tA\r\nB\t") == "a b");
  CHECK(normalize_answer("42") == "42");
  CHECK(normalize_answer("") == "");
  CHECK(normalize_answer("   ") == "");
}

TEST_CASE("answer matching") {
  SUBCASE("string equality after normalization") {
    CHECK(match_answer("Answer: East Wind", "east  wind"));
    CHECK_FALSE(match_answer("Answer: East Wind", "west wind"));
    CHECK(match_answer("reasoning\nAnswer: \xf0\x9f\x80\x8d",
                       "\xf0\x9f\x80\x8d"));
  }
  SUBCASE("numeric comparison tolerates rounding noise") {
    CHECK(match_answer("Answer: 0.5000000001", "0.5"));
    CHECK(match_answer("Answer: 1e3", "1000"));
    CHECK(match_answer("Answer: -42", "-42.0"));
    CHECK_FALSE(match_answer("Answer: 100.01", "100"));
    CHECK_FALSE(match_answer("Answer: 43", "42"));
  }
  SUBCASE("mixed numeric and text falls back to strings") {
    CHECK_FALSE(match_answer("Answer: 42", "42 tiles"));
    CHECK(match_answer("Answer: 42 tiles", "42  TILES"));
  }
  SUBCASE("marker free responses score their last line") {
    CHECK(match_answer("thinking\n42", "42"));
  }
}

TEST_CASE("probe accuracy reproduces the decision stream") {
  std::vector<TrainingExample> samples;
  MockBehavior behavior;
  behavior.seed = 77;
  behavior.correct_rate = 0.6;
  for (int i = 0; i < 200; ++i) {
    TrainingExample e;
    e.id = "probe-" + std::to_string(i);
    e.question = "q" + std::to_string(i);
    e.answer = std::to_string(i);
    behavior.answer_key[e.id] = e.answer;
    samples.push_back(e);
  }
  MockTeacherClient client(behavior);
  auto outcome = probe_accuracy(client, "mock-model", "task", samples);

  int expected = 0;
  for (const auto& e : samples)
    if (salted_unit(behavior.seed, "correct:", e.id) < behavior.correct_rate)
      ++expected;
  CHECK(outcome.n == 200);
  CHECK(outcome.correct == expected);
  CHECK(outcome.accuracy == doctest::Approx(expected / 200.0));
  CHECK(outcome.model_id == "mock-model");
  CHECK(outcome.task_id == "task");

  // Concurrency must not change the count.
  ProbeOptions serial;
  serial.max_in_flight = 1;
  auto repeat = probe_accuracy(client, "mock-model", "task", samples, serial);
  CHECK(repeat.correct == outcome.correct);
}

TEST_CASE("probe skips isolated transport failures") {
  std::vector<TrainingExample> samples;
  MockBehavior behavior;
  behavior.seed = 9;
  behavior.fail_rate = 0.2;
  for (int i = 0; i < 100; ++i) {
    TrainingExample e;
    e.id = "p-" + std::to_string(i);
    e.question = "q";
    e.answer = "1";
    behavior.answer_key[e.id] = e.answer;
    samples.push_back(e);
  }
  MockTeacherClient client(behavior);
  auto outcome = probe_accuracy(client, "m", "t", samples);

  int failures = 0;
  for (const auto& e : samples)
    if (salted_unit(behavior.seed, "fail:", e.id) < behavior.fail_rate)
      ++failures;
  CHECK(failures > 0);
  CHECK(outcome.n == 100 - failures);
  CHECK(outcome.correct == outcome.n);  // correct_rate is 1
}

TEST_CASE("probe aborts when failures dominate") {
  std::vector<TrainingExample> samples;
  MockBehavior behavior;
  behavior.fail_rate = 1.0;
  for (int i = 0; i < 10; ++i) {
    TrainingExample e;
    e.id = "x-" + std::to_string(i);
    e.question = "q";
    e.answer = "1";
    samples.push_back(e);
  }
  MockTeacherClient client(behavior);
  CHECK_THROWS_AS(probe_accuracy(client, "m", "t", samples), TransportError);
  CHECK_THROWS_AS(probe_accuracy(client, "m", "t", {}), ValidationError);
}

TEST_CASE("overall scores reproduce the four row comparison") {
  std::vector<StrategyMetrics> rows{
      {"balanced", 59.24, 20.29, 24, 1.59, 0},
      {"acc_first", 80.28, 45.44, 645, 40.42, 0},
      {"cost_first", 42.36, 90.73, 35, 2.55, 0},
      {"random", 62.84, 118.53, 37, 2.44, 0},
  };
  score_overall(rows);
  CHECK(rows[0].overall == doctest::Approx(0.8613).epsilon(1e-4));
  CHECK(rows[1].overall == doctest::Approx(0.4360).epsilon(1e-4));
  CHECK(rows[2].overall == doctest::Approx(0.5601).epsilon(1e-4));
  CHECK(rows[3].overall == doctest::Approx(0.6243).epsilon(1e-4));

  // balanced > random > cost_first > acc_first
  CHECK(rows[0].overall > rows[3].overall);
  CHECK(rows[3].overall > rows[2].overall);
  CHECK(rows[2].overall > rows[1].overall);
}

TEST_CASE("overall scoring handles flat columns and custom weights") {
  std::vector<StrategyMetrics> rows{
      {"a", 0.9, 50, 10, 1.0, 0},
      {"b", 0.6, 50, 20, 2.0, 0},
  };
  score_overall(rows);
  // Latency is flat, so both rows get 1 - 0.5 there.
  CHECK(rows[0].overall == doctest::Approx(0.25 * (1 + 0.5 + 1 + 1)));
  CHECK(rows[1].overall == doctest::Approx(0.25 * (0 + 0.5 + 0 + 0)));

  score_overall(rows, {1, 0, 0, 0});
  CHECK(rows[0].overall == doctest::Approx(1.0));
  CHECK(rows[1].overall == doctest::Approx(0.0));
}

TEST_CASE("overall scoring refuses degenerate tables") {
  std::vector<StrategyMetrics> one{{"solo", 1, 1, 1, 1, 0}};
  CHECK_THROWS_AS(score_overall(one), ValidationError);
}
