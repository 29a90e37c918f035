#pragma once

#include <cstdint>
#include <vector>

#include "volatility/boolfn.hpp"

namespace volatility::exact {

struct RealInterval {
  double lo;
  double hi;
  bool contains(double x) const { return lo <= x && x <= hi; }
  double width() const { return hi - lo; }
};

// Per-bit influences at bias p: I_i = 2p(1-p) * pivotal_i where pivotal_i is
// the probability that bit i decides the value. The total equals the expected
// unit-interval change count of the function.
struct InfluenceProfile {
  std::vector<double> per_bit;
  std::vector<double> pivotal;
  double total = 0.0;
};

// P(no tribe reaches quorum) = (sum_{i<r} C(ell,i) p^i (1-p)^(ell-i))^k,
// evaluated in log space. Throws std::domain_error when r > ell.
double prob_g_zero_exact(std::int64_t ell, std::int64_t k, double p, int r);

// Taylor bracket around the per-tribe miss probability: the p^r coefficient
// is C(ell,r) with remainder envelope E = ell^(r+1) p^(r+1); the k-th power
// interval is widened to the exponential sandwich e^(-2ku) <= (1-u)^k <=
// e^(-ku) when the base exceeds 1/2. Requires ell*p < 1 and 2r < ell;
// guaranteed to contain prob_g_zero_exact.
RealInterval prob_g_zero_bracket(std::int64_t ell, std::int64_t k, double p,
                                 int r);

// E[change count] of the weight-threshold indicator at integer threshold T:
// 2 T C(n,T) p^T (1-p)^(n-T+1), log space. Requires 0 <= T <= n.
double threshold_expected_changes_exact(std::int64_t n, double p, std::int64_t T);

// Stirling-limit companion 2 (np)^(1/4) / sqrt(2 pi), i.e. the form
// 2 sqrt(np) e^(-a^2) / sqrt(2 pi) with a = sqrt(log np)/2 simplified
// identically. Requires n*p > 1.
double threshold_expected_changes_asymptotic(std::int64_t n, double p);

// Exact enumeration over all 2^n configurations under the stationary product
// measure. Requires spec.n() <= 22; use Monte Carlo beyond that.
InfluenceProfile influence_bruteforce(const boolfn::FunctionSpec& spec, double p);

// Chebyshev ceiling a^(-2) = 4/log(np) on P(h = 1). Requires n*p > 1.
double degeneracy_bound_h(std::int64_t n, double p);

// reference curve p^2 log n (order bound, constant unspecified; report only)
double bkkkl_floor(double n, double p);

// P(Binomial(n,p) >= ceil(x)); the exact stationary weight tail
double weight_tail_ge(std::int64_t n, double p, double x);

}  // namespace volatility::exact
