#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "volatility/boolfn.hpp"
#include "volatility/params.hpp"
#include "volatility/stats.hpp"

namespace volatility::serialize {

// Minimal streaming JSON emitter. Reals are printed with %.17g so every value
// carries at least 15 significant digits and output is byte-deterministic.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);
  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }

  // splice an already-serialized JSON value
  JsonWriter& raw_append(std::string_view json_text);

  const std::string& str() const { return out_; }

 private:
  void separator();
  void value_string(std::string_view v);
  std::string out_;
  std::vector<bool> first_;  // per nesting level
  bool pending_key_ = false;
};

std::string format_real(double v);  // %.17g

void write_tribe_plan(JsonWriter& w, const params::TribePlan& plan);
void write_threshold_plan(JsonWriter& w, const params::ThresholdPlan& plan);
void write_assumption_report(JsonWriter& w, const params::AssumptionReport& rep);
void write_lemma_conditions(JsonWriter& w, const params::LemmaConditionReport& rep);
void write_function_spec(JsonWriter& w, const boolfn::FunctionSpec& spec);
void write_volatility_report(JsonWriter& w, const stats::VolatilityReport& rep);
void write_sweep_report(JsonWriter& w, const stats::SweepReport& rep);
void write_exit_result(JsonWriter& w, const stats::ExitDominationResult& res);

std::string tribe_plan_json(const params::TribePlan& plan);
std::string threshold_plan_json(const params::ThresholdPlan& plan);
std::string function_spec_json(const boolfn::FunctionSpec& spec);

// CSV: header row then one row per replica (replica, c)
std::string volatility_report_csv(const stats::VolatilityReport& rep);

// CSV: header row then one summary row per plan, column set fixed:
// n_hat,ell_hat,k_hat,p,H,T,p_g0_exact,p_g0_lo,p_g0_hi,p_f1_emp,EC_f_emp,
// EC_f_se,EC_h_exact,EC_h_asym,P_C0_h,tail_k8,tail_k32
std::string sweep_report_csv(const stats::SweepReport& rep);

}  // namespace volatility::serialize
