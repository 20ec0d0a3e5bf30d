#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace distill {

// mt19937_64 output is fully specified by the standard; the distribution
// adapters in <random> are not. This wrapper derives uniform values only
// through operations with pinned semantics so seeded runs reproduce
// byte-identically everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform on [0, 1).
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Unbiased uniform index in [0, n) via rejection.
  std::size_t index(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return static_cast<std::size_t>(x % bound);
  }

  // k distinct indices from [0, n), ascending. Floyd's sampling.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 gen_;
};

}  // namespace distill
