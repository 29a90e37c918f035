#include "volatility/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "volatility/dynamics.hpp"
#include "volatility/numeric.hpp"
#include "volatility/parallel.hpp"

namespace volatility::stats {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the mixed pair
  std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double dkw_epsilon(std::int64_t m, double delta) {
  if (m < 1) throw std::invalid_argument("dkw_epsilon: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("dkw_epsilon: delta must lie in (0,1)");
  }
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(m)));
}

std::pair<double, double> clopper_pearson(std::int64_t s, std::int64_t m,
                                          double confidence) {
  if (m < 1 || s < 0 || s > m) {
    throw std::invalid_argument("clopper_pearson: bad (s, m)");
  }
  const double alpha = 1.0 - confidence;
  double lo = 0.0;
  if (s > 0) {
    // P(Bin(m, p) >= s) increases in p; find p with tail = alpha/2
    double a = 0.0, b = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (a + b);
      if (numeric::binom_tail_ge(m, mid, s) < alpha / 2.0) {
        a = mid;
      } else {
        b = mid;
      }
    }
    lo = a;
  }
  double hi = 1.0;
  if (s < m) {
    // P(Bin(m, p) <= s) decreases in p
    double a = 0.0, b = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (a + b);
      const double le = 1.0 - numeric::binom_tail_ge(m, mid, s + 1);
      if (le < alpha / 2.0) {
        b = mid;
      } else {
        a = mid;
      }
    }
    hi = b;
  }
  return {lo, hi};
}

VolatilityReport summarize_counts(const boolfn::FunctionSpec& spec, double p,
                                  std::uint64_t seed,
                                  std::vector<std::int64_t> counts) {
  VolatilityReport report;
  report.spec = spec;
  report.p = p;
  report.seed = seed;
  report.replicas = static_cast<std::int64_t>(counts.size());
  report.counts = std::move(counts);
  const auto m = static_cast<double>(report.replicas);

  numeric::KahanSum sum;
  for (std::int64_t c : report.counts) {
    sum.add(static_cast<double>(c));
    ++report.histogram[c];
  }
  report.mean_c = sum.value() / m;
  numeric::KahanSum sq;
  for (std::int64_t c : report.counts) {
    const double d = static_cast<double>(c) - report.mean_c;
    sq.add(d * d);
  }
  report.se_c =
      report.replicas > 1 ? std::sqrt(sq.value() / (m - 1.0) / m) : 0.0;

  const std::int64_t zeros =
      report.histogram.count(0) ? report.histogram.at(0) : 0;
  report.p_zero = static_cast<double>(zeros) / m;
  std::tie(report.p_zero_ci_lo, report.p_zero_ci_hi) =
      clopper_pearson(zeros, report.replicas);

  report.tail_grid = default_tail_grid();
  report.tail.assign(report.tail_grid.size(), 0.0);
  for (std::size_t g = 0; g < report.tail_grid.size(); ++g) {
    std::int64_t at_least = 0;
    for (const auto& [c, freq] : report.histogram) {
      if (c >= report.tail_grid[g]) at_least += freq;
    }
    report.tail[g] = static_cast<double>(at_least) / m;
  }
  return report;
}

VolatilityReport mc_campaign(const boolfn::FunctionSpec& spec, double p,
                             std::int64_t replicas, std::uint64_t seed,
                             unsigned threads) {
  if (replicas < 1) throw std::invalid_argument("mc_campaign: replicas >= 1");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(replicas));
  parallel_for_index(replicas, threads, [&](std::int64_t i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    counts[static_cast<std::size_t>(i)] = dynamics::count_changes(spec, p, rng);
  });
  return summarize_counts(spec, p, seed, std::move(counts));
}

NondegeneracyReport nondegeneracy_report(const boolfn::FunctionSpec& ce_spec,
                                         double p, std::int64_t draws,
                                         std::uint64_t seed, unsigned threads) {
  const auto* ce = std::get_if<boolfn::Counterexample>(&ce_spec.variant());
  if (ce == nullptr) {
    throw std::invalid_argument("nondegeneracy_report: needs a counterexample spec");
  }
  if (draws < 1) throw std::invalid_argument("nondegeneracy_report: draws >= 1");

  std::vector<std::uint8_t> hits(static_cast<std::size_t>(draws), 0);
  parallel_for_index(draws, threads, [&](std::int64_t i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    const auto x = dynamics::sample_stationary(ce_spec.n(), p, rng);
    hits[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(boolfn::evaluate(ce_spec, x));
  });
  std::int64_t ones = 0;
  for (auto h : hits) ones += h;

  NondegeneracyReport rep;
  rep.draws = draws;
  rep.empirical = static_cast<double>(ones) / static_cast<double>(draws);
  const double p_g1 =
      p == 0.0 ? 0.0
               : 1.0 - exact::prob_g_zero_exact(ce->ell, ce->k, p, ce->r);
  rep.exact_lo =
      std::max(0.0, p_g1 - exact::weight_tail_ge(ce_spec.n(), p, ce->H - 1.0));
  rep.exact_hi =
      std::min(1.0, p_g1 + exact::weight_tail_ge(ce_spec.n(), p, ce->H));
  return rep;
}

TightnessTable tightness_table(std::span<const VolatilityReport> reports,
                               const std::vector<std::int64_t>& k_grid,
                               double epsilon, std::int64_t k_star) {
  TightnessTable table;
  table.k_grid = k_grid;
  table.epsilon = epsilon;
  table.k_star = k_star;
  for (const auto& report : reports) {
    table.n_values.push_back(report.spec.n());
    std::vector<double> row;
    row.reserve(k_grid.size());
    for (std::int64_t k : k_grid) {
      std::int64_t at_least = 0;
      for (const auto& [c, freq] : report.histogram) {
        if (c >= k) at_least += freq;
      }
      row.push_back(static_cast<double>(at_least) /
                    static_cast<double>(report.replicas));
    }
    table.rows.push_back(std::move(row));
  }
  if (reports.size() < 2) return table;  // one row, no flag

  bool evidence = false;
  bool all_below = true;
  for (std::size_t g = 0; g < k_grid.size(); ++g) {
    if (k_grid[g] < k_star) continue;
    evidence = true;
    for (std::size_t row = 0; row < table.rows.size(); ++row) {
      const auto hits = static_cast<std::int64_t>(std::llround(
          table.rows[row][g] * static_cast<double>(reports[row].replicas)));
      const auto [lo, hi] = clopper_pearson(hits, reports[row].replicas);
      (void)lo;
      if (hi >= epsilon) all_below = false;
    }
  }
  table.tame_evidence = evidence && all_below;
  return table;
}

ExitDominationResult exit_domination_test(const boolfn::FunctionSpec& tribes_spec,
                                          double p, int r, std::int64_t m,
                                          const std::vector<double>& t_grid,
                                          double t_max, std::uint64_t seed,
                                          unsigned threads) {
  if (m < 1) throw std::invalid_argument("exit_domination_test: m >= 1");
  std::vector<double> times(static_cast<std::size_t>(m));
  std::vector<std::uint8_t> censored(static_cast<std::size_t>(m), 0);
  parallel_for_index(m, threads, [&](std::int64_t i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    const auto sample =
        dynamics::first_exit_time(tribes_spec, p, rng, t_max);
    times[static_cast<std::size_t>(i)] =
        sample.censored ? std::numeric_limits<double>::infinity() : sample.time;
    censored[static_cast<std::size_t>(i)] = sample.censored ? 1 : 0;
  });

  ExitDominationResult res;
  res.m = m;
  res.dkw_epsilon = dkw_epsilon(m, 1e-3);
  res.low_power = res.dkw_epsilon >= 0.5;
  for (auto c : censored) res.censored += c;

  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  res.max_violation = -std::numeric_limits<double>::infinity();
  res.pass = true;
  for (double t : t_grid) {
    // survivors: exit strictly after t (censored samples sort to the end)
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), t) -
                       sorted.begin();
    const double survival =
        1.0 - static_cast<double>(below) / static_cast<double>(m);
    res.survival.emplace_back(t, survival);
    const double requirement =
        std::exp(-static_cast<double>(r) * t) - res.dkw_epsilon;
    res.max_violation = std::max(res.max_violation, requirement - survival);
    if (survival < requirement) res.pass = false;
  }
  return res;
}

namespace {

bool witness_spot_check(const boolfn::FunctionSpec& spec, double p,
                        std::uint64_t seed) {
  RngStream rng(seed, 0);
  const std::int64_t n = spec.n();
  for (int trial = 0; trial < 8; ++trial) {
    const std::int64_t i = rng.uniform_below(n);
    const std::int64_t j = rng.uniform_below(n);
    const auto witness = boolfn::transitive_witness(spec, i, j);
    if (witness.map_index(i) != j) return false;
    for (int probe = 0; probe < 64; ++probe) {
      const std::int64_t t = rng.uniform_below(n);
      if (witness.map_index(witness.map_index(t)) != t) return false;  // involution
    }
    for (int rep = 0; rep < 4; ++rep) {
      const auto x = dynamics::sample_stationary(n, p, rng);
      const auto permuted = witness.apply(x);
      if (boolfn::evaluate(spec, x) != boolfn::evaluate(spec, permuted)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

SweepReport counterexample_sweep(const std::vector<params::TribePlan>& plans,
                                 std::int64_t replicas, std::uint64_t seed,
                                 unsigned threads) {
  SweepReport report;
  report.replicas = replicas;
  report.seed = seed;
  if (plans.empty()) return report;
  report.r = plans.front().r;

  for (std::size_t row_idx = 0; row_idx < plans.size(); ++row_idx) {
    const auto& plan = plans[row_idx];
    SweepRow row;
    row.plan = plan;
    row.tplan = params::threshold_plan(plan.n_hat, plan.p_hat);

    const auto f_spec = boolfn::FunctionSpec::counterexample(
        plan.ell_hat, plan.k_hat, plan.r, row.tplan.H);
    const auto h_spec = boolfn::FunctionSpec::threshold(plan.n_hat, row.tplan.H);

    row.p_g0_exact =
        exact::prob_g_zero_exact(plan.ell_hat, plan.k_hat, plan.p_hat, plan.r);
    row.p_g0_bracket =
        exact::prob_g_zero_bracket(plan.ell_hat, plan.k_hat, plan.p_hat, plan.r);
    row.ec_h_exact = exact::threshold_expected_changes_exact(
        plan.n_hat, plan.p_hat, row.tplan.T);
    row.ec_h_asym =
        exact::threshold_expected_changes_asymptotic(plan.n_hat, plan.p_hat);
    row.p_h1_exact = exact::weight_tail_ge(plan.n_hat, plan.p_hat, row.tplan.H);
    row.degeneracy_bound = exact::degeneracy_bound_h(plan.n_hat, plan.p_hat);

    const std::uint64_t base = static_cast<std::uint64_t>(row_idx) * 16;
    row.f_report = mc_campaign(f_spec, plan.p_hat, replicas,
                               derive_seed(seed, base + 0), threads);
    row.h_report = mc_campaign(h_spec, plan.p_hat, replicas,
                               derive_seed(seed, base + 1), threads);
    row.nondegeneracy = nondegeneracy_report(
        f_spec, plan.p_hat, replicas, derive_seed(seed, base + 2), threads);
    row.witness_ok =
        witness_spot_check(f_spec, plan.p_hat, derive_seed(seed, base + 3));
    report.rows.push_back(std::move(row));
  }

  // trend flags: finite-n evidence, never limit claims
  auto& rows = report.rows;
  if (rows.size() >= 2) {
    bool increasing = true;
    bool p0_nondecreasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& prev = rows[i - 1].f_report;
      const auto& cur = rows[i].f_report;
      const double gap = cur.mean_c - prev.mean_c;
      const double sep =
          4.0 * std::sqrt(prev.se_c * prev.se_c + cur.se_c * cur.se_c);
      if (!(gap > sep)) increasing = false;
      if (rows[i].h_report.p_zero_ci_hi < rows[i - 1].h_report.p_zero_ci_lo) {
        p0_nondecreasing = false;
      }
    }
    report.trends.ec_f_increasing = increasing;
    report.trends.p_c0_h_nondecreasing = p0_nondecreasing;
  }
  bool tails_ok = true;
  for (const auto& row : rows) {
    std::int64_t at_least = 0;
    for (const auto& [c, freq] : row.f_report.histogram) {
      if (c >= 32) at_least += freq;
    }
    if (static_cast<double>(at_least) / static_cast<double>(replicas) >= 0.05) {
      tails_ok = false;
    }
  }
  report.trends.tails_stable = tails_ok;
  return report;
}

}  // namespace volatility::stats
