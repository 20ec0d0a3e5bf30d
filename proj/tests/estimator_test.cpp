#include "distillplan/estimator.hpp"
#include "distillplan/rng.hpp"
#include "doctest.h"

using namespace distill;

namespace {

ModelSpec student(double params_b, double min_vram, double bytes = 2.0) {
  ModelSpec m;
  m.id = "m";
  m.role = ModelRole::student;
  m.params_b = params_b;
  m.min_vram_gb = min_vram;
  m.bytes_per_param = bytes;
  return m;
}

ServerSpec server(double vram, double tflops, double bw, double cost = 1.0) {
  ServerSpec s;
  s.id = "s";
  s.region = "r";
  s.gpu_model = "g";
  s.gpu_count = 1;
  s.vram_gb = vram;
  s.fp16_tflops = tflops;
  s.mem_bw_gbps = bw;
  s.hourly_cost_usd = cost;
  s.rtt_ms = 30;
  return s;
}

}  // namespace

TEST_CASE("training time matches the flops model") {
  // 3B params, 1e7 tokens, 320 TF peak, defaults 0.35 adapter share at
  // 0.3 utilization:
  //   6 * 3e9 * 1e7 * 0.35 / (0.3 * 320e12) s = 656.25 s = 0.1822916... h
  auto m = student(3.0, 12);
  auto s = server(24, 320, 1000);
  CHECK(estimate_train_time_h(m, s, 10'000'000) ==
        doctest::Approx(0.1822916667).epsilon(1e-9));
}

TEST_CASE("training time scales with the config factors") {
  auto m = student(3.0, 12);
  auto s = server(24, 320, 1000);
  const double base = estimate_train_time_h(m, s, 10'000'000);
  EstimatorConfig full{1.0, 0.3};
  CHECK(estimate_train_time_h(m, s, 10'000'000, full) ==
        doctest::Approx(base / 0.35));
  EstimatorConfig perfect{0.35, 0.6};
  CHECK(estimate_train_time_h(m, s, 10'000'000, perfect) ==
        doctest::Approx(base / 2));
}

TEST_CASE("decode throughput is bandwidth over weight bytes") {
  // 1000 GB/s over 3B * 2 bytes = 166.67 tok/s.
  auto m = student(3.0, 12);
  auto s = server(24, 320, 1000);
  CHECK(estimate_tps(m, s) == doctest::Approx(166.6666667).epsilon(1e-9));

  auto fp32 = student(3.0, 12, 4.0);
  CHECK(estimate_tps(fp32, s) == doctest::Approx(83.33333333));
}

TEST_CASE("memory fit is boundary inclusive") {
  auto s = server(24, 320, 1000);
  CHECK(fits_memory(student(3.0, 24), s));
  CHECK_FALSE(fits_memory(student(3.0, 24.001), s));
  CHECK(estimate_tps(student(3.0, 24.001), s) == 0.0);

  ModelSpec no_floor = student(3.0, 12);
  no_floor.min_vram_gb.reset();
  CHECK(fits_memory(no_floor, s));
}

TEST_CASE("pair estimate combines time cost and fit") {
  auto m = student(3.0, 12);
  auto s = server(24, 320, 1000, 0.42);
  auto e = estimate_pair(m, s, 10'000'000);
  CHECK(e.fits_memory);
  CHECK(e.train_time_h == doctest::Approx(0.1822916667));
  CHECK(e.tokens_per_s == doctest::Approx(166.6666667));
  CHECK(e.train_cost_usd == doctest::Approx(0.1822916667 * 0.42));

  auto big = student(70.0, 160);
  auto too_small = estimate_pair(big, s, 10'000'000);
  CHECK_FALSE(too_small.fits_memory);
  CHECK(too_small.tokens_per_s == 0.0);
}

TEST_CASE("estimates are monotone in the driving quantities") {
  Rng rng(88);
  for (int t = 0; t < 500; ++t) {
    const double params = rng.uniform(0.5, 70);
    const double tflops = rng.uniform(50, 2500);
    const double bw = rng.uniform(400, 32000);
    const std::uint64_t tokens =
        1000 + static_cast<std::uint64_t>(rng.index(100'000'000));
    auto m = student(params, 1);
    auto s = server(10000, tflops, bw);

    auto bigger_model = student(params * 1.5, 1);
    CHECK(estimate_train_time_h(bigger_model, s, tokens) >
          estimate_train_time_h(m, s, tokens));
    CHECK(estimate_tps(bigger_model, s) < estimate_tps(m, s));

    auto faster = server(10000, tflops * 2, bw * 2);
    CHECK(estimate_train_time_h(m, faster, tokens) <
          estimate_train_time_h(m, s, tokens));
    CHECK(estimate_tps(m, faster) > estimate_tps(m, s));

    CHECK(estimate_train_time_h(m, s, tokens * 2) >
          estimate_train_time_h(m, s, tokens));
  }
}
