#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace volatility {

// Reproducible random stream keyed by (seed, stream id). Distinct stream ids
// give independent streams; the same pair always replays identically.
// Generator: std::mt19937_64 seeded via std::seed_seq from the pair
// (period 2^19937-1, well above the required 2^64).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id),
        static_cast<std::uint32_t>(stream_id >> 32)};
    gen_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::mt19937_64& engine() { return gen_; }

  // uniform on [0, 1)
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // uniform on {0, 1, ..., bound-1}
  std::int64_t uniform_below(std::int64_t bound) {
    return static_cast<std::int64_t>(
        std::uniform_int_distribution<std::uint64_t>(
            0, static_cast<std::uint64_t>(bound) - 1)(gen_));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // strictly positive Exp(rate) variate
  double exponential(double rate) {
    double u = uniform01();
    while (u == 0.0) u = uniform01();
    return -std::log1p(-u) / rate;
  }

  std::int64_t binomial(std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    return std::binomial_distribution<std::int64_t>(trials, p)(gen_);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 gen_;
};

}  // namespace volatility
