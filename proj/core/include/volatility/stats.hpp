#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "volatility/boolfn.hpp"
#include "volatility/exact.hpp"
#include "volatility/params.hpp"

namespace volatility::stats {

// Replica samples of the unit-interval change count with summary statistics.
// Deterministic given (spec, p, replicas, seed): replica i draws from stream
// (seed, i) and aggregation runs in replica order.
struct VolatilityReport {
  boolfn::FunctionSpec spec;
  double p = 0.0;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
  double mean_c = 0.0;
  double se_c = 0.0;
  double p_zero = 0.0;
  double p_zero_ci_lo = 0.0;  // Clopper-Pearson 95%
  double p_zero_ci_hi = 1.0;
  std::vector<std::int64_t> tail_grid;  // k values
  std::vector<double> tail;             // P(C >= k), same order
  std::map<std::int64_t, std::int64_t> histogram;
  std::vector<std::int64_t> counts;  // per replica, replica-id order
};

struct NondegeneracyReport {
  double empirical = 0.0;  // stationary frequency of f = 1
  double exact_lo = 0.0;   // P(g=1) - P(weight >= H-1)
  double exact_hi = 1.0;   // P(g=1) + P(weight >= H)
  std::int64_t draws = 0;
};

struct TightnessTable {
  std::vector<std::int64_t> k_grid;
  std::vector<std::int64_t> n_values;        // one per report
  std::vector<std::vector<double>> rows;     // P(C_n >= k) per report
  bool tame_evidence = false;
  double epsilon = 0.05;
  std::int64_t k_star = 32;
};

struct ExitDominationResult {
  bool pass = false;
  double max_violation = 0.0;  // max over grid of e^(-rt) - eps - S_hat(t)
  double dkw_epsilon = 0.0;
  std::int64_t censored = 0;
  std::int64_t m = 0;
  bool low_power = false;  // DKW band wider than 0.5: vacuous
  std::vector<std::pair<double, double>> survival;  // (t, S_hat(t))
};

struct SweepRow {
  params::TribePlan plan;
  params::ThresholdPlan tplan;
  double p_g0_exact = 0.0;
  exact::RealInterval p_g0_bracket{0.0, 1.0};
  double ec_h_exact = 0.0;
  double ec_h_asym = 0.0;
  double p_h1_exact = 0.0;
  double degeneracy_bound = 0.0;
  NondegeneracyReport nondegeneracy;
  VolatilityReport f_report;
  VolatilityReport h_report;
  bool witness_ok = false;
};

struct TrendFlags {
  bool ec_f_increasing = false;       // 4-SE separated consecutive means
  bool p_c0_h_nondecreasing = false;  // within Clopper-Pearson CIs
  bool tails_stable = false;          // P(C(f) >= k_star) < epsilon everywhere
};

struct SweepReport {
  int r = 2;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
  std::vector<SweepRow> rows;
  TrendFlags trends;
};

inline const std::vector<std::int64_t>& default_tail_grid() {
  static const std::vector<std::int64_t> grid{1, 2, 4, 8, 16, 32, 64};
  return grid;
}

VolatilityReport mc_campaign(const boolfn::FunctionSpec& spec, double p,
                             std::int64_t replicas, std::uint64_t seed,
                             unsigned threads = 0);

// aggregation of raw counts into a report (exposed for merge-order tests)
VolatilityReport summarize_counts(const boolfn::FunctionSpec& spec, double p,
                                  std::uint64_t seed,
                                  std::vector<std::int64_t> counts);

NondegeneracyReport nondegeneracy_report(const boolfn::FunctionSpec& ce_spec,
                                         double p, std::int64_t draws,
                                         std::uint64_t seed,
                                         unsigned threads = 0);

TightnessTable tightness_table(std::span<const VolatilityReport> reports,
                               const std::vector<std::int64_t>& k_grid,
                               double epsilon = 0.05, std::int64_t k_star = 32);

ExitDominationResult exit_domination_test(const boolfn::FunctionSpec& tribes_spec,
                                          double p, int r, std::int64_t m,
                                          const std::vector<double>& t_grid,
                                          double t_max, std::uint64_t seed,
                                          unsigned threads = 0);

SweepReport counterexample_sweep(const std::vector<params::TribePlan>& plans,
                                 std::int64_t replicas, std::uint64_t seed,
                                 unsigned threads = 0);

// distribution-free empirical-CDF band half-width sqrt(log(2/delta)/(2m))
double dkw_epsilon(std::int64_t m, double delta);

// exact binomial (Clopper-Pearson) two-sided CI for s successes in m trials
std::pair<double, double> clopper_pearson(std::int64_t s, std::int64_t m,
                                          double confidence = 0.95);

// deterministic seed derivation so sub-campaigns never share streams
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace volatility::stats
