#include "volatility/serialize.hpp"

#include <cstdio>
#include <stdexcept>

#include "volatility/version.hpp"

namespace volatility::serialize {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void JsonWriter::separator() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!first_.empty()) {
    if (!first_.back()) out_.push_back(',');
    first_.back() = false;
  }
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_.push_back('{');
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_.push_back('}');
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separator();
  out_.push_back('[');
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_.push_back(']');
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view name) {
  separator();
  value_string(name);
  out_.push_back(':');
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separator();
  out_ += format_real(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  separator();
  value_string(v);
  return *this;
}

JsonWriter& JsonWriter::raw_append(std::string_view json_text) {
  separator();
  out_ += json_text;
  return *this;
}

void JsonWriter::value_string(std::string_view v) {
  out_.push_back('"');
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      case '\r': out_ += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out_ += buf;
        } else {
          out_.push_back(c);
        }
    }
  }
  out_.push_back('"');
}

void write_tribe_plan(JsonWriter& w, const params::TribePlan& plan) {
  w.begin_object();
  w.key("r").value(plan.r);
  w.key("n_raw").value(plan.n_raw);
  w.key("ell_real").value(plan.ell_real);
  w.key("k_real").value(plan.k_real);
  w.key("ell_hat").value(plan.ell_hat);
  w.key("k_hat").value(plan.k_hat);
  w.key("n_hat").value(plan.n_hat);
  w.key("p_hat").value(plan.p_hat);
  w.end_object();
}

void write_threshold_plan(JsonWriter& w, const params::ThresholdPlan& plan) {
  w.begin_object();
  w.key("n").value(plan.n);
  w.key("p").value(plan.p);
  w.key("a").value(plan.a);
  w.key("H").value(plan.H);
  w.key("T").value(plan.T);
  w.end_object();
}

void write_assumption_report(JsonWriter& w, const params::AssumptionReport& rep) {
  w.begin_object();
  w.key("holds_A").value(rep.holds_A);
  w.key("holds_B").value(rep.holds_B);
  w.key("holds_C").value(rep.holds_C);
  w.key("heuristic").value(rep.heuristic);
  w.key("r_used").value(rep.r_used);
  w.key("diagnostics").begin_object();
  for (const auto& [name, value] : rep.diagnostics) {
    w.key(name).value(value);
  }
  w.end_object();
  w.end_object();
}

void write_lemma_conditions(JsonWriter& w,
                            const params::LemmaConditionReport& rep) {
  w.begin_object();
  w.key("i_pass").value(rep.i_pass);
  w.key("ii_value").value(rep.ii_value);
  w.key("iii_value").value(rep.iii_value);
  w.key("iii_pass").value(rep.iii_pass);
  w.end_object();
}

void write_function_spec(JsonWriter& w, const boolfn::FunctionSpec& spec) {
  w.begin_object();
  struct Visitor {
    JsonWriter& w;
    const boolfn::FunctionSpec& spec;
    void operator()(const boolfn::Dictator&) const {
      w.key("variant").value("dictator");
      w.key("n").value(spec.n());
    }
    void operator()(const boolfn::Parity&) const {
      w.key("variant").value("parity");
      w.key("n").value(spec.n());
    }
    void operator()(const boolfn::Majority&) const {
      w.key("variant").value("majority");
      w.key("n").value(spec.n());
    }
    void operator()(const boolfn::Tribes& t) const {
      w.key("variant").value("tribes");
      w.key("n").value(spec.n());
      w.key("ell").value(t.ell);
      w.key("k").value(t.k);
      w.key("r").value(t.r);
    }
    void operator()(const boolfn::Threshold& t) const {
      w.key("variant").value("threshold");
      w.key("n").value(spec.n());
      w.key("H").value(t.H);
    }
    void operator()(const boolfn::Counterexample& c) const {
      w.key("variant").value("counterexample");
      w.key("n").value(spec.n());
      w.key("ell").value(c.ell);
      w.key("k").value(c.k);
      w.key("r").value(c.r);
      w.key("H").value(c.H);
    }
  };
  std::visit(Visitor{w, spec}, spec.variant());
  w.end_object();
}

void write_volatility_report(JsonWriter& w, const stats::VolatilityReport& rep) {
  w.begin_object();
  w.key("tool_version").value(kVersion);
  w.key("spec");
  write_function_spec(w, rep.spec);
  w.key("p").value(rep.p);
  w.key("replicas").value(rep.replicas);
  w.key("seed").value(rep.seed);
  w.key("mean_c").value(rep.mean_c);
  w.key("se_c").value(rep.se_c);
  w.key("p_zero").value(rep.p_zero);
  w.key("p_zero_ci_lo").value(rep.p_zero_ci_lo);
  w.key("p_zero_ci_hi").value(rep.p_zero_ci_hi);
  w.key("tail").begin_array();
  for (std::size_t g = 0; g < rep.tail_grid.size(); ++g) {
    w.begin_object();
    w.key("k").value(rep.tail_grid[g]);
    w.key("p_ge_k").value(rep.tail[g]);
    w.end_object();
  }
  w.end_array();
  w.key("histogram").begin_array();
  for (const auto& [c, freq] : rep.histogram) {
    w.begin_object();
    w.key("c").value(c);
    w.key("freq").value(freq);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

void write_exit_result(JsonWriter& w, const stats::ExitDominationResult& res) {
  w.begin_object();
  w.key("pass").value(res.pass);
  w.key("max_violation").value(res.max_violation);
  w.key("dkw_epsilon").value(res.dkw_epsilon);
  w.key("censored").value(res.censored);
  w.key("m").value(res.m);
  w.key("low_power").value(res.low_power);
  w.key("survival").begin_array();
  for (const auto& [t, s] : res.survival) {
    w.begin_object();
    w.key("t").value(t);
    w.key("s_hat").value(s);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

void write_sweep_report(JsonWriter& w, const stats::SweepReport& rep) {
  w.begin_object();
  w.key("tool_version").value(kVersion);
  w.key("r").value(rep.r);
  w.key("replicas").value(rep.replicas);
  w.key("seed").value(rep.seed);
  w.key("rows").begin_array();
  for (const auto& row : rep.rows) {
    w.begin_object();
    w.key("plan");
    write_tribe_plan(w, row.plan);
    w.key("threshold_plan");
    write_threshold_plan(w, row.tplan);
    w.key("p_g0_exact").value(row.p_g0_exact);
    w.key("p_g0_lo").value(row.p_g0_bracket.lo);
    w.key("p_g0_hi").value(row.p_g0_bracket.hi);
    w.key("ec_h_exact").value(row.ec_h_exact);
    w.key("ec_h_asym").value(row.ec_h_asym);
    w.key("p_h1_exact").value(row.p_h1_exact);
    w.key("degeneracy_bound").value(row.degeneracy_bound);
    w.key("p_f1_emp").value(row.nondegeneracy.empirical);
    w.key("p_f1_lo_exact").value(row.nondegeneracy.exact_lo);
    w.key("p_f1_hi_exact").value(row.nondegeneracy.exact_hi);
    w.key("witness_ok").value(row.witness_ok);
    w.key("f_campaign");
    write_volatility_report(w, row.f_report);
    w.key("h_campaign");
    write_volatility_report(w, row.h_report);
    w.end_object();
  }
  w.end_array();
  w.key("trends").begin_object();
  w.key("ec_f_increasing").value(rep.trends.ec_f_increasing);
  w.key("p_c0_h_nondecreasing").value(rep.trends.p_c0_h_nondecreasing);
  w.key("tails_stable").value(rep.trends.tails_stable);
  w.end_object();
  w.end_object();
}

std::string tribe_plan_json(const params::TribePlan& plan) {
  JsonWriter w;
  write_tribe_plan(w, plan);
  return w.str();
}

std::string threshold_plan_json(const params::ThresholdPlan& plan) {
  JsonWriter w;
  write_threshold_plan(w, plan);
  return w.str();
}

std::string function_spec_json(const boolfn::FunctionSpec& spec) {
  JsonWriter w;
  write_function_spec(w, spec);
  return w.str();
}

std::string volatility_report_csv(const stats::VolatilityReport& rep) {
  std::string out = "replica,c\n";
  for (std::size_t i = 0; i < rep.counts.size(); ++i) {
    out += std::to_string(i);
    out.push_back(',');
    out += std::to_string(rep.counts[i]);
    out.push_back('\n');
  }
  return out;
}

namespace {

double tail_at(const stats::VolatilityReport& rep, std::int64_t k) {
  std::int64_t at_least = 0;
  for (const auto& [c, freq] : rep.histogram) {
    if (c >= k) at_least += freq;
  }
  return static_cast<double>(at_least) / static_cast<double>(rep.replicas);
}

}  // namespace

std::string sweep_report_csv(const stats::SweepReport& rep) {
  std::string out =
      "n_hat,ell_hat,k_hat,p,H,T,p_g0_exact,p_g0_lo,p_g0_hi,p_f1_emp,"
      "EC_f_emp,EC_f_se,EC_h_exact,EC_h_asym,P_C0_h,tail_k8,tail_k32\n";
  for (const auto& row : rep.rows) {
    out += std::to_string(row.plan.n_hat);
    out.push_back(',');
    out += std::to_string(row.plan.ell_hat);
    out.push_back(',');
    out += std::to_string(row.plan.k_hat);
    out.push_back(',');
    out += format_real(row.plan.p_hat);
    out.push_back(',');
    out += format_real(row.tplan.H);
    out.push_back(',');
    out += std::to_string(row.tplan.T);
    out.push_back(',');
    out += format_real(row.p_g0_exact);
    out.push_back(',');
    out += format_real(row.p_g0_bracket.lo);
    out.push_back(',');
    out += format_real(row.p_g0_bracket.hi);
    out.push_back(',');
    out += format_real(row.nondegeneracy.empirical);
    out.push_back(',');
    out += format_real(row.f_report.mean_c);
    out.push_back(',');
    out += format_real(row.f_report.se_c);
    out.push_back(',');
    out += format_real(row.ec_h_exact);
    out.push_back(',');
    out += format_real(row.ec_h_asym);
    out.push_back(',');
    out += format_real(row.h_report.p_zero);
    out.push_back(',');
    out += format_real(tail_at(row.f_report, 8));
    out.push_back(',');
    out += format_real(tail_at(row.f_report, 32));
    out.push_back('\n');
  }
  return out;
}

}  // namespace volatility::serialize
