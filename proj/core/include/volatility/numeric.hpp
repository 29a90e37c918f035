#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace volatility::numeric {

// Kahan-compensated accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// log C(n, k) for potentially huge n. For k up to 2^20 the sum of log ratios
// is used (no lgamma cancellation); beyond that, lgamma.
inline double log_choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  if (k > n - k) k = n - k;
  if (k <= (1 << 20)) {
    KahanSum s;
    for (std::int64_t t = 1; t <= k; ++t) {
      s.add(std::log(static_cast<double>(n - t + 1) / static_cast<double>(t)));
    }
    return s.value();
  }
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// C(n, k) in double via the product form; exact up to rounding for the small k
// used throughout (k is a tribes quorum, single digits).
inline double choose_small_k(std::int64_t n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int t = 1; t <= k; ++t) {
    c *= static_cast<double>(n - t + 1) / static_cast<double>(t);
  }
  return c;
}

// falling factorial n(n-1)...(n-k+1)
inline double falling_factorial(std::int64_t n, int k) {
  double f = 1.0;
  for (int t = 0; t < k; ++t) f *= static_cast<double>(n - t);
  return f;
}

// log pmf of Binomial(n, p) at k
inline double binom_log_pmf(std::int64_t n, double p, std::int64_t k) {
  if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
  return log_choose(n, k) + static_cast<double>(k) * std::log(p) +
         static_cast<double>(n - k) * std::log1p(-p);
}

// P(Binomial(n,p) >= k), summed from the side with decreasing terms.
inline double binom_tail_ge(std::int64_t n, double p, std::int64_t k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double mean = static_cast<double>(n) * p;
  const double odds = p / (1.0 - p);
  if (static_cast<double>(k) > mean) {
    // upper tail directly; terms decrease
    double term = std::exp(binom_log_pmf(n, p, k));
    KahanSum s;
    for (std::int64_t j = k; j <= n; ++j) {
      s.add(term);
      if (term < 1e-18 * s.value()) break;
      term *= odds * static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
    return std::min(1.0, s.value());
  }
  // sum the lower side downward from k-1 (terms decrease below the mode)
  double term = std::exp(binom_log_pmf(n, p, k - 1));
  KahanSum s;
  for (std::int64_t j = k - 1; j >= 0; --j) {
    s.add(term);
    if (term < 1e-18 * s.value()) break;
    term *= static_cast<double>(j) / (odds * static_cast<double>(n - j + 1));
  }
  return std::max(0.0, 1.0 - s.value());
}

// P(weight >= x) for real x: integer weights, so this is the tail at ceil(x).
inline double binom_tail_ge_real(std::int64_t n, double p, double x) {
  if (x <= 0.0) return 1.0;
  return binom_tail_ge(n, p, static_cast<std::int64_t>(std::ceil(x)));
}

// Ceiling with snap-to-integer: values within relative 1e-9 of an integer are
// treated as that integer, so exact-integer parameter families survive pow().
inline std::int64_t ceil_snapped(double x, double rel_tol = 1e-9) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= rel_tol * std::max(1.0, std::abs(x))) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace volatility::numeric
