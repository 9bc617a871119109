#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hcnas {

// Seeded random source. All draws are derived from mt19937_64 with explicit
// bit-level constructions so that a given seed yields the same stream on any
// platform. Not thread-safe; pass one instance per logical stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in the open interval (0, 1).
  double uniform01() {
    const std::uint64_t bits = gen_() >> 12;  // 52 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard Gumbel: -log(-log U).
  double gumbel() { return -std::log(-std::log(uniform01())); }

  // Standard normal via Box-Muller.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(gen_() % static_cast<std::uint64_t>(n));
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hcnas
