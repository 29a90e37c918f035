#include "volatility/exact.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "volatility/numeric.hpp"

namespace volatility::exact {

using numeric::KahanSum;

double prob_g_zero_exact(std::int64_t ell, std::int64_t k, double p, int r) {
  if (r < 2) throw std::invalid_argument("prob_g_zero_exact: r must be >= 2");
  if (r > ell) throw std::domain_error("prob_g_zero_exact: requires r <= ell");
  if (k < 1) throw std::invalid_argument("prob_g_zero_exact: k must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("prob_g_zero_exact: p must lie in [0,1]");
  }
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;

  const double tail = numeric::binom_tail_ge(ell, p, r);
  if (tail < 0.5) {
    return std::exp(static_cast<double>(k) * std::log1p(-tail));
  }
  KahanSum s;
  for (int i = 0; i < r; ++i) {
    s.add(std::exp(numeric::binom_log_pmf(ell, p, i)));
  }
  const double base = s.value();
  if (base <= 0.0) return 0.0;
  return std::exp(static_cast<double>(k) * std::log(base));
}

RealInterval prob_g_zero_bracket(std::int64_t ell, std::int64_t k, double p,
                                 int r) {
  if (r < 2) throw std::invalid_argument("prob_g_zero_bracket: r must be >= 2");
  if (!(2 * r < ell)) {
    throw std::domain_error("prob_g_zero_bracket: requires 2r < ell");
  }
  if (!(p >= 0.0)) throw std::invalid_argument("prob_g_zero_bracket: p < 0");
  if (!(static_cast<double>(ell) * p < 1.0)) {
    throw std::domain_error("prob_g_zero_bracket: requires ell*p < 1");
  }
  if (p == 0.0) return RealInterval{1.0, 1.0};

  const double kk = static_cast<double>(k);
  const double center = numeric::choose_small_k(ell, r) * std::pow(p, r);
  const double envelope = std::pow(static_cast<double>(ell) * p, r + 1);
  const double u_hi = center + envelope;   // 1 - base_lo
  const double u_lo = std::max(0.0, center - envelope);  // 1 - base_hi

  double lo = u_hi >= 1.0 ? 0.0 : std::exp(kk * std::log1p(-u_hi));
  double hi = std::exp(kk * std::log1p(-u_lo));

  if (u_hi < 0.5) {  // base in (1/2, 1): widen to the exponential sandwich
    lo = std::min(lo, std::exp(-2.0 * kk * u_hi));
    hi = std::max(hi, std::exp(-kk * u_lo));
  }
  return RealInterval{lo, std::min(1.0, hi)};
}

double threshold_expected_changes_exact(std::int64_t n, double p,
                                        std::int64_t T) {
  if (T < 0 || T > n) {
    throw std::domain_error("threshold_expected_changes_exact: need 0 <= T <= n");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("threshold_expected_changes_exact: bad p");
  }
  if (T == 0) return 0.0;  // constant function
  if (p == 0.0 || p == 1.0) return 0.0;  // frozen configuration
  const double log_ec = std::log(2.0 * static_cast<double>(T)) +
                        numeric::log_choose(n, T) +
                        static_cast<double>(T) * std::log(p) +
                        static_cast<double>(n - T + 1) * std::log1p(-p);
  return std::exp(log_ec);
}

double threshold_expected_changes_asymptotic(std::int64_t n, double p) {
  const double np = static_cast<double>(n) * p;
  if (!(np > 1.0)) {
    throw std::domain_error(
        "threshold_expected_changes_asymptotic: requires n*p > 1");
  }
  return 2.0 * std::pow(np, 0.25) / std::sqrt(2.0 * std::numbers::pi);
}

namespace {

// standalone evaluator on packed configurations, independent of the
// incremental path it serves as an oracle for
int mask_eval(const boolfn::FunctionSpec& spec, std::uint32_t mask) {
  const auto n = static_cast<int>(spec.n());
  const int w = std::popcount(mask);
  struct Visitor {
    std::uint32_t mask;
    int n, w;
    int operator()(const boolfn::Dictator&) const { return mask & 1u; }
    int operator()(const boolfn::Parity&) const { return ((n - w) % 2 == 0) ? 1 : 0; }
    int operator()(const boolfn::Majority&) const { return 2 * w > n ? 1 : 0; }
    int tribes(std::int64_t ell, std::int64_t k, int r) const {
      const auto block = (1u << ell) - 1u;
      for (std::int64_t j = 0; j < k; ++j) {
        if (std::popcount((mask >> (j * ell)) & block) >= r) return 1;
      }
      return 0;
    }
    int operator()(const boolfn::Tribes& t) const { return tribes(t.ell, t.k, t.r); }
    int operator()(const boolfn::Threshold& t) const {
      return static_cast<double>(w) >= t.H ? 1 : 0;
    }
    int operator()(const boolfn::Counterexample& c) const {
      const auto dw = static_cast<double>(w);
      if (dw >= c.H) return 1;
      if (dw >= c.H - 1.0) return 0;
      return tribes(c.ell, c.k, c.r);
    }
  };
  return std::visit(Visitor{mask, n, w}, spec.variant());
}

}  // namespace

InfluenceProfile influence_bruteforce(const boolfn::FunctionSpec& spec,
                                      double p) {
  const std::int64_t n = spec.n();
  if (n > 22) {
    throw std::invalid_argument(
        "influence_bruteforce: n > 22; use a Monte Carlo campaign instead");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("influence_bruteforce: p must lie in [0,1]");
  }
  const auto size = std::uint64_t{1} << n;
  std::vector<std::uint8_t> table(size);
  for (std::uint64_t mask = 0; mask < size; ++mask) {
    table[mask] =
        static_cast<std::uint8_t>(mask_eval(spec, static_cast<std::uint32_t>(mask)));
  }

  // stationary weight of the n-1 other bits, by their one-count
  std::vector<double> measure(static_cast<std::size_t>(n), 1.0);
  for (std::int64_t w = 0; w < n; ++w) {
    measure[static_cast<std::size_t>(w)] =
        std::pow(p, static_cast<double>(w)) *
        std::pow(1.0 - p, static_cast<double>(n - 1 - w));
  }

  InfluenceProfile profile;
  profile.per_bit.resize(static_cast<std::size_t>(n));
  profile.pivotal.resize(static_cast<std::size_t>(n));
  const double flip_factor = 2.0 * p * (1.0 - p);
  KahanSum total;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    KahanSum pivotal;
    for (std::uint64_t mask = 0; mask < size; ++mask) {
      if (mask & bit) continue;
      if (table[mask] != table[mask | bit]) {
        pivotal.add(measure[static_cast<std::size_t>(
            std::popcount(mask))]);
      }
    }
    const double piv = std::min(1.0, pivotal.value());
    profile.pivotal[static_cast<std::size_t>(i)] = piv;
    profile.per_bit[static_cast<std::size_t>(i)] = flip_factor * piv;
    total.add(flip_factor * piv);
  }
  profile.total = total.value();
  return profile;
}

double degeneracy_bound_h(std::int64_t n, double p) {
  const double np = static_cast<double>(n) * p;
  if (!(np > 1.0)) {
    throw std::domain_error("degeneracy_bound_h: requires n*p > 1");
  }
  return 4.0 / std::log(np);
}

double bkkkl_floor(double n, double p) {
  if (!(n >= 1.0)) throw std::invalid_argument("bkkkl_floor: n must be >= 1");
  return p * p * std::log(n);
}

double weight_tail_ge(std::int64_t n, double p, double x) {
  return numeric::binom_tail_ge_real(n, p, x);
}

}  // namespace volatility::exact
