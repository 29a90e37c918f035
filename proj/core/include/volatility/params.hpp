#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace volatility::params {

// Bias sequence p_n. Either a power law p_n = c * n^(-alpha) with
// 0 < alpha < 1, or an explicit table of (n, p) rows with n strictly
// increasing and p non-increasing.
class PSequence {
 public:
  struct PowerLaw {
    double c;
    double alpha;
  };
  struct Table {
    std::vector<std::pair<std::int64_t, double>> rows;
  };

  static PSequence power_law(double c, double alpha);
  static PSequence table(std::vector<std::pair<std::int64_t, double>> rows);

  // p_n; throws std::domain_error if the value is not in (0,1) or, for
  // tables, if n is not a table row.
  double at(std::int64_t n) const;

  bool is_power_law() const { return std::holds_alternative<PowerLaw>(family_); }
  const PowerLaw& power() const { return std::get<PowerLaw>(family_); }
  const Table& table_rows() const { return std::get<Table>(family_); }

 private:
  explicit PSequence(std::variant<PowerLaw, Table> family)
      : family_(std::move(family)) {}
  std::variant<PowerLaw, Table> family_;
};

struct RawTribeParams {
  double ell_real;  // (n p^r)^(-1/(r-1))
  double k_real;    // n / ell_real
  bool feasible;    // ceil(ell_real) >= 2
};

// Tribe-size plan after rounding to integers: ell_hat = ceil(ell_real),
// k_hat = ceil(k_real), n_hat = ell_hat * k_hat, p_hat = p_{n_hat}.
struct TribePlan {
  int r = 2;
  std::int64_t n_raw = 0;
  double ell_real = 0.0;
  double k_real = 0.0;
  std::int64_t ell_hat = 0;
  std::int64_t k_hat = 0;
  std::int64_t n_hat = 0;
  double p_hat = 0.0;
};

// Weight-threshold plan: a = sqrt(log(n p))/2, H = n p + a sqrt(n p (1-p)),
// T = ceil(H).
struct ThresholdPlan {
  std::int64_t n = 0;
  double p = 0.0;
  double a = 0.0;
  double H = 0.0;
  std::int64_t T = 0;
};

struct AssumptionReport {
  bool holds_A = false;  // n p_n -> infinity
  bool holds_B = false;  // n p_n^r -> 0
  bool holds_C = false;  // p_n / p_{phi(n)} -> 1 under relative perturbations
  bool heuristic = false;  // true when checked on finite table data only
  int r_used = 2;
  std::vector<std::pair<std::string, double>> diagnostics;
};

struct LemmaConditionReport {
  bool i_pass = false;      // 2r < ell_hat
  double ii_value = 0.0;    // p_hat * ell_hat (should tend to 0 along the family)
  double iii_value = 0.0;   // p_hat^r * ell_hat^r * k_hat
  bool iii_pass = false;    // iii_value in [1/4, 4]
};

RawTribeParams raw_tribe_params(std::int64_t n, double p, int r);

// Throws std::domain_error when the raw params are infeasible (ell < 2).
TribePlan rounded_plan(std::int64_t n, const PSequence& pseq, int r);

// Feasible plans for n in [n_lo, n_hi], deduplicated on n_hat (first
// occurrence kept), sorted by strictly increasing n_hat, at most max_count.
std::vector<TribePlan> subsequence(const PSequence& pseq, int r,
                                   std::int64_t n_lo, std::int64_t n_hi,
                                   std::size_t max_count);

AssumptionReport validate_assumptions(const PSequence& pseq, int r);

LemmaConditionReport check_lemma_conditions(const TribePlan& plan);

// Throws std::domain_error when n*p <= 1 (a undefined) or ceil(H) > n.
ThresholdPlan threshold_plan(std::int64_t n, double p);

}  // namespace volatility::params
