#include "volatility/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "volatility/numeric.hpp"

namespace volatility::params {

PSequence PSequence::power_law(double c, double alpha) {
  if (!(c > 0.0)) throw std::invalid_argument("PSequence: c must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("PSequence: alpha must lie in (0,1)");
  }
  return PSequence(PowerLaw{c, alpha});
}

PSequence PSequence::table(std::vector<std::pair<std::int64_t, double>> rows) {
  if (rows.empty()) throw std::invalid_argument("PSequence: empty table");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rows[i].second > 0.0 && rows[i].second < 1.0)) {
      throw std::invalid_argument("PSequence: table p must lie in (0,1)");
    }
    if (i > 0) {
      if (rows[i].first <= rows[i - 1].first) {
        throw std::invalid_argument("PSequence: table n must be strictly increasing");
      }
      if (rows[i].second > rows[i - 1].second) {
        throw std::invalid_argument("PSequence: table p must be non-increasing");
      }
    }
  }
  return PSequence(Table{std::move(rows)});
}

double PSequence::at(std::int64_t n) const {
  if (n < 1) throw std::domain_error("PSequence: n must be positive");
  if (const auto* pl = std::get_if<PowerLaw>(&family_)) {
    const double p = pl->c * std::exp(-pl->alpha * std::log(static_cast<double>(n)));
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error("PSequence: p_n outside (0,1) at requested n");
    }
    return p;
  }
  const auto& rows = std::get<Table>(family_).rows;
  const auto it = std::lower_bound(
      rows.begin(), rows.end(), n,
      [](const auto& row, std::int64_t key) { return row.first < key; });
  if (it == rows.end() || it->first != n) {
    throw std::domain_error("PSequence: n not present in table");
  }
  return it->second;
}

RawTribeParams raw_tribe_params(std::int64_t n, double p, int r) {
  if (n < 1) throw std::invalid_argument("raw_tribe_params: n must be positive");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("raw_tribe_params: p must lie in (0,1)");
  }
  if (r < 2) throw std::invalid_argument("raw_tribe_params: r must be >= 2");
  const double log_npr =
      std::log(static_cast<double>(n)) + static_cast<double>(r) * std::log(p);
  const double ell = std::exp(-log_npr / static_cast<double>(r - 1));
  const double k = static_cast<double>(n) / ell;
  const bool feasible = numeric::ceil_snapped(ell) >= 2;
  return RawTribeParams{ell, k, feasible};
}

TribePlan rounded_plan(std::int64_t n, const PSequence& pseq, int r) {
  const double p = pseq.at(n);
  const RawTribeParams raw = raw_tribe_params(n, p, r);
  if (!raw.feasible) {
    throw std::domain_error("rounded_plan: infeasible, tribe size ell < 2");
  }
  TribePlan plan;
  plan.r = r;
  plan.n_raw = n;
  plan.ell_real = raw.ell_real;
  plan.k_real = raw.k_real;
  plan.ell_hat = numeric::ceil_snapped(raw.ell_real);
  plan.k_hat = numeric::ceil_snapped(raw.k_real);
  plan.n_hat = plan.ell_hat * plan.k_hat;
  plan.p_hat = pseq.at(plan.n_hat);
  return plan;
}

std::vector<TribePlan> subsequence(const PSequence& pseq, int r,
                                   std::int64_t n_lo, std::int64_t n_hi,
                                   std::size_t max_count) {
  if (!(n_lo < n_hi)) throw std::invalid_argument("subsequence: need n_lo < n_hi");
  constexpr std::int64_t kEnumerationBudget = 1 << 21;

  std::vector<std::int64_t> candidates;
  const std::int64_t span = n_hi - n_lo + 1;
  if (span <= kEnumerationBudget) {
    candidates.reserve(static_cast<std::size_t>(span));
    for (std::int64_t n = n_lo; n <= n_hi; ++n) candidates.push_back(n);
  } else {
    // geometric scan; endpoints included, duplicates collapse below
    const double lo = std::log(static_cast<double>(n_lo));
    const double hi = std::log(static_cast<double>(n_hi));
    candidates.reserve(kEnumerationBudget + 1);
    for (std::int64_t i = 0; i <= kEnumerationBudget; ++i) {
      const double f = static_cast<double>(i) / kEnumerationBudget;
      auto n = static_cast<std::int64_t>(std::llround(std::exp(lo + f * (hi - lo))));
      candidates.push_back(std::clamp(n, n_lo, n_hi));
    }
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
  }

  std::vector<TribePlan> plans;
  for (std::int64_t n : candidates) {
    TribePlan plan;
    try {
      plan = rounded_plan(n, pseq, r);
    } catch (const std::domain_error&) {
      continue;
    }
    plans.push_back(plan);
  }
  // keep the first n producing each n_hat, then order by n_hat
  std::stable_sort(plans.begin(), plans.end(),
                   [](const TribePlan& a, const TribePlan& b) {
                     return a.n_hat < b.n_hat;
                   });
  plans.erase(std::unique(plans.begin(), plans.end(),
                          [](const TribePlan& a, const TribePlan& b) {
                            return a.n_hat == b.n_hat;
                          }),
              plans.end());
  if (plans.size() > max_count) plans.resize(max_count);
  return plans;
}

namespace {

void check_c_powerlaw(const PSequence& pseq, AssumptionReport& report) {
  // diagnostic: worst relative drift of p over (1+eps) index perturbations
  double worst = 0.0;
  for (double eps : {0.1, 0.01}) {
    for (int j = 2; j <= 12; ++j) {
      std::int64_t n = 1;
      for (int t = 0; t < j; ++t) n *= 10;
      const auto m = static_cast<std::int64_t>(
          std::ceil((1.0 + eps) * static_cast<double>(n)));
      try {
        worst = std::max(worst, std::abs(pseq.at(n) / pseq.at(m) - 1.0));
      } catch (const std::domain_error&) {
        // p outside (0,1) at tiny n for large c; skip the grid point
      }
    }
  }
  report.holds_C = true;  // any power law is regularly varying
  report.diagnostics.emplace_back("C_max_ratio_drift", worst);
}

}  // namespace

AssumptionReport validate_assumptions(const PSequence& pseq, int r) {
  if (r < 2) throw std::invalid_argument("validate_assumptions: r must be >= 2");
  AssumptionReport report;
  report.r_used = r;

  if (pseq.is_power_law()) {
    const auto& pl = pseq.power();
    const double growth_A = 1.0 - pl.alpha;           // exponent of n p_n
    const double growth_B = 1.0 - pl.alpha * r;       // exponent of n p_n^r
    report.holds_A = growth_A > 0.0;                  // always true: alpha < 1
    report.holds_B = growth_B < 0.0;
    report.heuristic = false;
    report.diagnostics.emplace_back("A_np_exponent", growth_A);
    report.diagnostics.emplace_back("B_npr_exponent", growth_B);
    check_c_powerlaw(pseq, report);
    return report;
  }

  // finite table: trends only, flagged heuristic
  const auto& rows = pseq.table_rows().rows;
  report.heuristic = true;
  bool np_increasing = true;
  bool npr_decreasing = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev_np = static_cast<double>(rows[i - 1].first) * rows[i - 1].second;
    const double cur_np = static_cast<double>(rows[i].first) * rows[i].second;
    if (cur_np <= prev_np) np_increasing = false;
    const double prev_npr = static_cast<double>(rows[i - 1].first) *
                            std::pow(rows[i - 1].second, r);
    const double cur_npr =
        static_cast<double>(rows[i].first) * std::pow(rows[i].second, r);
    if (cur_npr >= prev_npr) npr_decreasing = false;
  }
  report.holds_A = np_increasing;
  report.holds_B = npr_decreasing;
  report.diagnostics.emplace_back(
      "A_np_last", static_cast<double>(rows.back().first) * rows.back().second);
  report.diagnostics.emplace_back(
      "B_npr_last",
      static_cast<double>(rows.back().first) * std::pow(rows.back().second, r));

  // C on available adjacent pairs with small relative gap
  double worst = 0.0;
  bool any_pair = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double gap = static_cast<double>(rows[i].first - rows[i - 1].first) /
                       static_cast<double>(rows[i - 1].first);
    if (gap <= 0.1) {
      any_pair = true;
      worst = std::max(worst,
                       std::abs(rows[i - 1].second / rows[i].second - 1.0));
    }
  }
  report.holds_C = any_pair && worst <= 0.05;
  report.diagnostics.emplace_back("C_max_ratio_drift_small_gaps", worst);
  report.diagnostics.emplace_back("C_pairs_available", any_pair ? 1.0 : 0.0);
  return report;
}

LemmaConditionReport check_lemma_conditions(const TribePlan& plan) {
  LemmaConditionReport rep;
  rep.i_pass = 2 * plan.r < plan.ell_hat;
  rep.ii_value = plan.p_hat * static_cast<double>(plan.ell_hat);
  rep.iii_value = std::pow(plan.p_hat * static_cast<double>(plan.ell_hat), plan.r) *
                  static_cast<double>(plan.k_hat);
  rep.iii_pass = rep.iii_value >= 0.25 && rep.iii_value <= 4.0;
  return rep;
}

ThresholdPlan threshold_plan(std::int64_t n, double p) {
  if (n < 1) throw std::invalid_argument("threshold_plan: n must be positive");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("threshold_plan: p must lie in (0,1)");
  }
  const double np = static_cast<double>(n) * p;
  if (!(np > 1.0)) {
    throw std::domain_error("threshold_plan: a undefined, requires n*p > 1");
  }
  ThresholdPlan plan;
  plan.n = n;
  plan.p = p;
  plan.a = std::sqrt(std::log(np)) / 2.0;
  plan.H = np + plan.a * std::sqrt(np * (1.0 - p));
  plan.T = static_cast<std::int64_t>(std::ceil(plan.H));
  if (plan.T > n) {
    throw std::domain_error("threshold_plan: threshold exceeds n");
  }
  return plan;
}

}  // namespace volatility::params
