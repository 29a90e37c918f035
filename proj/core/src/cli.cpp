#include "volatility/cli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "volatility/dynamics.hpp"
#include "volatility/exact.hpp"
#include "volatility/numeric.hpp"
#include "volatility/parallel.hpp"
#include "volatility/serialize.hpp"
#include "volatility/stats.hpp"
#include "volatility/version.hpp"

namespace volatility::cli {

namespace {

using nlohmann::json;

double parse_real_or_fraction(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const double num = std::stod(text.substr(0, slash));
    const double den = std::stod(text.substr(slash + 1));
    if (den == 0.0) throw std::invalid_argument("fraction with zero denominator");
    return num / den;
  }
  return std::stod(text);
}

boolfn::FunctionSpec spec_from_json(const json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  if (variant == "dictator") {
    return boolfn::FunctionSpec::dictator(j.at("n").get<std::int64_t>());
  }
  if (variant == "parity") {
    return boolfn::FunctionSpec::parity(j.at("n").get<std::int64_t>());
  }
  if (variant == "majority") {
    return boolfn::FunctionSpec::majority(j.at("n").get<std::int64_t>());
  }
  if (variant == "tribes") {
    return boolfn::FunctionSpec::tribes(j.at("ell").get<std::int64_t>(),
                                        j.at("k").get<std::int64_t>(),
                                        j.at("r").get<int>());
  }
  if (variant == "threshold") {
    double H;
    if (j.contains("H")) {
      H = j.at("H").get<double>();
    } else {
      H = static_cast<double>(j.at("T").get<std::int64_t>());
    }
    return boolfn::FunctionSpec::threshold(j.at("n").get<std::int64_t>(), H);
  }
  if (variant == "counterexample") {
    return boolfn::FunctionSpec::counterexample(
        j.at("ell").get<std::int64_t>(), j.at("k").get<std::int64_t>(),
        j.at("r").get<int>(), j.at("H").get<double>());
  }
  throw std::invalid_argument("unknown function variant: " + variant);
}

void write_config(serialize::JsonWriter& w, const ExperimentConfig& config) {
  w.begin_object();
  const char* names[] = {"params", "simulate", "influence", "sweep", "verify"};
  w.key("command").value(names[static_cast<int>(config.command)]);
  w.key("r").value(config.r);
  if (!config.n_values.empty()) {
    w.key("n").begin_array();
    for (auto n : config.n_values) w.value(n);
    w.end_array();
  }
  if (config.n_lo) w.key("n_lo").value(*config.n_lo);
  if (config.n_hi) w.key("n_hi").value(*config.n_hi);
  w.key("max_count").value(static_cast<std::int64_t>(config.max_count));
  if (config.fspec) {
    w.key("spec");
    serialize::write_function_spec(w, *config.fspec);
  }
  if (config.p) w.key("p").value(*config.p);
  w.key("replicas").value(config.replicas);
  if (config.seed) w.key("seed").value(*config.seed);
  if (!config.out_path.empty()) w.key("out").value(config.out_path);
  w.key("format").value(config.format);
  w.key("threads").value(static_cast<std::int64_t>(config.threads));
  w.end_object();
}

void write_artifact(const ExperimentConfig& config, const std::string& body) {
  if (config.out_path.empty()) return;
  std::ofstream file(config.out_path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open output file: " + config.out_path);
  }
  file << body;
}

// JSON artifacts wrap the payload with the full config and tool version
std::string json_artifact(const ExperimentConfig& config,
                          const std::function<void(serialize::JsonWriter&)>& payload) {
  serialize::JsonWriter w;
  w.begin_object();
  w.key("tool_version").value(kVersion);
  w.key("config");
  write_config(w, config);
  w.key("result");
  payload(w);
  w.end_object();
  return w.str() + "\n";
}

std::vector<params::TribePlan> plans_from_config(const ExperimentConfig& config) {
  if (!config.pseq) throw std::invalid_argument("missing --pseq");
  std::vector<params::TribePlan> plans;
  if (!config.n_values.empty()) {
    for (std::int64_t n : config.n_values) {
      plans.push_back(params::rounded_plan(n, *config.pseq, config.r));
    }
    std::sort(plans.begin(), plans.end(),
              [](const auto& a, const auto& b) { return a.n_hat < b.n_hat; });
    plans.erase(std::unique(plans.begin(), plans.end(),
                            [](const auto& a, const auto& b) {
                              return a.n_hat == b.n_hat;
                            }),
                plans.end());
    return plans;
  }
  if (config.n_lo && config.n_hi) {
    return params::subsequence(*config.pseq, config.r, *config.n_lo,
                               *config.n_hi, config.max_count);
  }
  throw std::invalid_argument("need --n or --n-lo/--n-hi");
}

int cmd_params(const ExperimentConfig& config, std::ostream& out) {
  if (!config.pseq) throw std::invalid_argument("missing --pseq");
  if (config.n_values.empty() && !(config.n_lo && config.n_hi)) {
    throw std::invalid_argument("need --n or --n-lo/--n-hi");
  }

  const auto report = params::validate_assumptions(*config.pseq, config.r);
  out << "assumptions r=" << config.r << ": A=" << (report.holds_A ? "yes" : "no")
      << " B=" << (report.holds_B ? "yes" : "no")
      << " C=" << (report.holds_C ? "yes" : "no")
      << (report.heuristic ? " (heuristic: finite table)" : "") << "\n";
  for (const auto& [name, value] : report.diagnostics) {
    out << "  " << name << " = " << serialize::format_real(value) << "\n";
  }

  std::vector<std::int64_t> ns = config.n_values;
  if (ns.empty()) {
    for (const auto& plan :
         params::subsequence(*config.pseq, config.r, *config.n_lo, *config.n_hi,
                             config.max_count)) {
      ns.push_back(plan.n_raw);
    }
  }

  serialize::JsonWriter rows;
  rows.begin_array();
  out << "n,ell_real,k_real,ell_hat,k_hat,n_hat,p_hat,a,H,T,cond_i,cond_iii\n";
  for (std::int64_t n : ns) {
    const double p = config.pseq->at(n);
    const auto raw = params::raw_tribe_params(n, p, config.r);
    if (!raw.feasible) {
      out << n << "," << serialize::format_real(raw.ell_real) << ","
          << serialize::format_real(raw.k_real) << ",infeasible (ell < 2)\n";
      continue;
    }
    const auto plan = params::rounded_plan(n, *config.pseq, config.r);
    const auto conditions = params::check_lemma_conditions(plan);
    out << n << "," << serialize::format_real(plan.ell_real) << ","
        << serialize::format_real(plan.k_real) << "," << plan.ell_hat << ","
        << plan.k_hat << "," << plan.n_hat << ","
        << serialize::format_real(plan.p_hat);
    rows.begin_object();
    rows.key("plan");
    serialize::write_tribe_plan(rows, plan);
    rows.key("conditions");
    serialize::write_lemma_conditions(rows, conditions);
    try {
      const auto tplan = params::threshold_plan(plan.n_hat, plan.p_hat);
      out << "," << serialize::format_real(tplan.a) << ","
          << serialize::format_real(tplan.H) << "," << tplan.T;
      rows.key("threshold_plan");
      serialize::write_threshold_plan(rows, tplan);
    } catch (const std::domain_error&) {
      out << ",undefined,undefined,undefined";
    }
    out << "," << (conditions.i_pass ? "pass" : "fail") << ","
        << serialize::format_real(conditions.iii_value)
        << (conditions.iii_pass ? " pass" : " flagged") << "\n";
    rows.end_object();
  }
  rows.end_array();

  if (!config.out_path.empty()) {
    write_artifact(config, json_artifact(config, [&](serialize::JsonWriter& w) {
                     w.begin_object();
                     w.key("assumptions");
                     serialize::write_assumption_report(w, report);
                     w.key("plans");
                     w.raw_append(rows.str());
                     w.end_object();
                   }));
  }
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& config, std::ostream& out) {
  if (!config.fspec) throw std::invalid_argument("missing --spec");
  if (!config.p) throw std::invalid_argument("missing --p");
  if (!config.seed) throw std::invalid_argument("--seed is mandatory for simulate");

  const auto report = stats::mc_campaign(*config.fspec, *config.p,
                                         config.replicas, *config.seed,
                                         config.threads);
  out << "spec=" << serialize::function_spec_json(report.spec)
      << " p=" << serialize::format_real(report.p)
      << " replicas=" << report.replicas << " seed=" << report.seed << "\n";
  out << "mean_c=" << serialize::format_real(report.mean_c)
      << " se=" << serialize::format_real(report.se_c)
      << " p_zero=" << serialize::format_real(report.p_zero) << " ci=["
      << serialize::format_real(report.p_zero_ci_lo) << ","
      << serialize::format_real(report.p_zero_ci_hi) << "]\n";
  for (std::size_t g = 0; g < report.tail_grid.size(); ++g) {
    out << "P(C>=" << report.tail_grid[g]
        << ")=" << serialize::format_real(report.tail[g]) << "\n";
  }

  if (!config.trace_path.empty()) {
    // replay replica 0 and record its events with the running f value
    RngStream rng(*config.seed, 0);
    auto x = dynamics::sample_stationary(config.fspec->n(), *config.p, rng);
    boolfn::EvalState state(*config.fspec, x);
    std::string csv = "time,bit,new_value,f_value\n";
    dynamics::run_trajectory(x, *config.p, 1.0, rng,
                             [&](const dynamics::FlipEvent& e) {
                               csv += serialize::format_real(e.time);
                               csv.push_back(',');
                               csv += std::to_string(e.bit);
                               csv.push_back(',');
                               csv += e.new_value ? '1' : '0';
                               csv.push_back(',');
                               csv += std::to_string(
                                   state.apply_flip(e.bit, e.new_value));
                               csv.push_back('\n');
                               return true;
                             });
    std::ofstream file(config.trace_path, std::ios::binary);
    if (!file) {
      throw std::runtime_error("cannot open trace file: " + config.trace_path);
    }
    file << csv;
  }

  if (!config.out_path.empty()) {
    if (config.format == "csv") {
      write_artifact(config, serialize::volatility_report_csv(report));
    } else {
      write_artifact(config, json_artifact(config, [&](serialize::JsonWriter& w) {
                       serialize::write_volatility_report(w, report);
                     }));
    }
  }
  return kExitOk;
}

int cmd_influence(const ExperimentConfig& config, std::ostream& out) {
  if (!config.fspec) throw std::invalid_argument("missing --spec");
  if (!config.p) throw std::invalid_argument("missing --p");
  const auto& spec = *config.fspec;
  const double p = *config.p;

  serialize::JsonWriter payload;
  payload.begin_object();
  bool have_value = false;

  if (const auto* th = std::get_if<boolfn::Threshold>(&spec.variant())) {
    const auto T = static_cast<std::int64_t>(std::ceil(th->H));
    const double exact_total =
        exact::threshold_expected_changes_exact(spec.n(), p, T);
    out << "exact_total=" << serialize::format_real(exact_total) << "\n";
    payload.key("exact_total").value(exact_total);
    have_value = true;
    if (static_cast<double>(spec.n()) * p > 1.0) {
      const double asym = exact::threshold_expected_changes_asymptotic(spec.n(), p);
      out << "asymptotic=" << serialize::format_real(asym) << "\n";
      out << "degeneracy_bound=" << serialize::format_real(
                 exact::degeneracy_bound_h(spec.n(), p)) << "\n";
      payload.key("asymptotic").value(asym);
    }
  }
  if (const auto* tr = std::get_if<boolfn::Tribes>(&spec.variant())) {
    const double g0 = exact::prob_g_zero_exact(tr->ell, tr->k, p, tr->r);
    out << "p_g_zero_exact=" << serialize::format_real(g0) << "\n";
    payload.key("p_g_zero_exact").value(g0);
    try {
      const auto bracket = exact::prob_g_zero_bracket(tr->ell, tr->k, p, tr->r);
      out << "p_g_zero_bracket=[" << serialize::format_real(bracket.lo) << ","
          << serialize::format_real(bracket.hi) << "]\n";
      payload.key("p_g_zero_lo").value(bracket.lo);
      payload.key("p_g_zero_hi").value(bracket.hi);
    } catch (const std::domain_error&) {
      // outside the Taylor bracket's validity region; exact value stands alone
    }
  }
  if (spec.n() <= 22) {
    const auto profile = exact::influence_bruteforce(spec, p);
    out << "bruteforce_total=" << serialize::format_real(profile.total) << "\n";
    payload.key("bruteforce_total").value(profile.total);
    payload.key("per_bit").begin_array();
    for (double v : profile.per_bit) payload.value(v);
    payload.end_array();
    have_value = true;
  }
  payload.end_object();

  if (!have_value) {
    throw std::invalid_argument(
        "influence: n > 22 has no brute-force route and this variant has no "
        "closed form; run a Monte Carlo campaign (simulate) instead");
  }
  if (!config.out_path.empty()) {
    write_artifact(config, json_artifact(config, [&](serialize::JsonWriter& w) {
                     w.raw_append(payload.str());
                   }));
  }
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& out) {
  if (!config.seed) throw std::invalid_argument("--seed is mandatory for sweep");
  const auto plans = plans_from_config(config);
  const auto report = stats::counterexample_sweep(plans, config.replicas,
                                                  *config.seed, config.threads);
  const std::string csv = serialize::sweep_report_csv(report);
  out << csv;
  out << "trends: ec_f_increasing=" << (report.trends.ec_f_increasing ? "yes" : "no")
      << " p_c0_h_nondecreasing="
      << (report.trends.p_c0_h_nondecreasing ? "yes" : "no")
      << " tails_stable=" << (report.trends.tails_stable ? "yes" : "no") << "\n";

  if (!config.out_path.empty()) {
    if (config.format == "csv") {
      write_artifact(config, csv);
    } else {
      write_artifact(config, json_artifact(config, [&](serialize::JsonWriter& w) {
                       serialize::write_sweep_report(w, report);
                     }));
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify: the oracle suite. Every module invariant with an independent check,
// one line per check, exit 3 on any failure.
// ---------------------------------------------------------------------------

struct VerifyContext {
  std::uint64_t seed;
  std::ostream& out;
  bool all_ok = true;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    out << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!ok && !detail.empty()) out << ": " << detail;
    out << "\n";
    if (!ok) all_ok = false;
  }
};

dynamics::HypercubeState state_from_mask(std::int64_t n, std::uint64_t mask) {
  dynamics::HypercubeState x(n, dynamics::Storage::dense);
  for (std::int64_t i = 0; i < n; ++i) {
    if ((mask >> i) & 1u) x.set(i, true);
  }
  return x;
}

// stationary-measure enumeration of P(g = 0) over all 2^(ell k) states
double enumerate_g_zero(std::int64_t ell, std::int64_t k, double p, int r) {
  const std::int64_t n = ell * k;
  numeric::KahanSum sum;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    bool convinced = false;
    for (std::int64_t j = 0; j < k && !convinced; ++j) {
      const auto block = (mask >> (j * ell)) & ((std::uint64_t{1} << ell) - 1);
      if (std::popcount(block) >= r) convinced = true;
    }
    if (!convinced) {
      const int w = std::popcount(mask);
      sum.add(std::pow(p, w) * std::pow(1.0 - p, static_cast<double>(n - w)));
    }
  }
  return sum.value();
}

void verify_params(VerifyContext& v) {
  bool identities = true;
  bool invariants = true;
  std::string detail;
  for (double alpha : {0.55, 2.0 / 3.0, 0.75}) {
    const auto pseq = params::PSequence::power_law(1.0, alpha);
    for (int r : {2, 3}) {
      for (std::int64_t n : {std::int64_t{100}, std::int64_t{10000},
                             std::int64_t{1000000}, std::int64_t{1000000000}}) {
        const double p = pseq.at(n);
        const auto raw = params::raw_tribe_params(n, p, r);
        if (!raw.feasible) continue;
        const double nk = raw.ell_real * raw.k_real;
        if (std::abs(nk - static_cast<double>(n)) > 1e-9 * static_cast<double>(n)) {
          identities = false;
        }
        const double k_identity =
            std::pow(static_cast<double>(n) * p,
                     static_cast<double>(r) / static_cast<double>(r - 1));
        if (std::abs(raw.k_real - k_identity) > 1e-9 * k_identity) {
          identities = false;
        }
        const auto plan = params::rounded_plan(n, pseq, r);
        if (plan.ell_hat * plan.k_hat != plan.n_hat) invariants = false;
        if (plan.ell_hat < 2) invariants = false;
        const double slack = raw.ell_real + raw.k_real + 1.0;
        const auto drift = static_cast<double>(plan.n_hat - n);
        if (drift < 0.0 || drift >= slack) {
          invariants = false;
          detail = "n_hat drift outside [0, ell+k+1) at n=" + std::to_string(n);
        }
      }
    }
  }
  v.check("params.raw_identities", identities);
  v.check("params.plan_invariants", invariants, detail);

  bool ordering = true;
  const auto pseq = params::PSequence::power_law(1.0, 2.0 / 3.0);
  const auto plans = params::subsequence(pseq, 2, 64, 4096, 1000);
  for (std::size_t i = 1; i < plans.size(); ++i) {
    if (plans[i].n_hat <= plans[i - 1].n_hat) ordering = false;
  }
  v.check("params.subsequence_ordering", ordering && !plans.empty());
}

void verify_exact(VerifyContext& v) {
  bool enumeration_ok = true;
  for (const auto& [ell, k] : std::vector<std::pair<std::int64_t, std::int64_t>>{
           {2, 4}, {3, 2}, {4, 4}, {5, 3}, {8, 2}}) {
    for (int r = 2; r <= std::min<std::int64_t>(3, ell); ++r) {
      for (double p : {0.1, 0.37, 0.5}) {
        const double direct = enumerate_g_zero(ell, k, p, r);
        const double fast = exact::prob_g_zero_exact(ell, k, p, r);
        if (std::abs(direct - fast) > 1e-12 * std::max(direct, 1e-300)) {
          enumeration_ok = false;
        }
      }
    }
  }
  v.check("exact.prob_g_zero_vs_enumeration", enumeration_ok);

  RngStream rng(v.seed, 101);
  bool contained = true;
  for (int trial = 0; trial < 200; ++trial) {
    const int r = 2 + static_cast<int>(rng.uniform_below(2));
    const std::int64_t ell = 2 * r + 1 + rng.uniform_below(200);
    const std::int64_t k = 1 + rng.uniform_below(10000);
    const double p = rng.uniform01() * 0.99 / static_cast<double>(ell);
    if (p <= 0.0) continue;
    const auto bracket = exact::prob_g_zero_bracket(ell, k, p, r);
    const double exact_value = exact::prob_g_zero_exact(ell, k, p, r);
    if (!bracket.contains(exact_value)) contained = false;
  }
  v.check("exact.bracket_containment", contained);

  bool threshold_ok = true;
  for (std::int64_t n = 1; n <= 12; ++n) {
    for (double p : {0.2, 0.5}) {
      for (std::int64_t T = 0; T <= n; ++T) {
        const double formula = exact::threshold_expected_changes_exact(n, p, T);
        const auto profile = exact::influence_bruteforce(
            boolfn::FunctionSpec::threshold(n, static_cast<double>(T)), p);
        if (std::abs(formula - profile.total) >
            1e-10 * std::max(1e-300, profile.total)) {
          threshold_ok = false;
        }
      }
    }
  }
  v.check("exact.threshold_formula_vs_bruteforce", threshold_ok);

  const auto dictator = exact::influence_bruteforce(
      boolfn::FunctionSpec::dictator(8), 0.3);
  bool influence_ok = std::abs(dictator.per_bit[0] - 2 * 0.3 * 0.7) < 1e-12 &&
                      dictator.per_bit[5] == 0.0;
  const auto parity =
      exact::influence_bruteforce(boolfn::FunctionSpec::parity(10), 0.3);
  if (std::abs(parity.total - 2 * 10 * 0.3 * 0.7) > 1e-12 * parity.total) {
    influence_ok = false;
  }
  const auto majority =
      exact::influence_bruteforce(boolfn::FunctionSpec::majority(3), 0.5);
  for (double b : majority.per_bit) {
    if (std::abs(b - 0.25) > 1e-12) influence_ok = false;
  }
  v.check("exact.influence_closed_forms", influence_ok);
}

void verify_boolfn(VerifyContext& v) {
  RngStream rng(v.seed, 202);
  const std::vector<boolfn::FunctionSpec> specs = {
      boolfn::FunctionSpec::dictator(9),
      boolfn::FunctionSpec::parity(10),
      boolfn::FunctionSpec::majority(11),
      boolfn::FunctionSpec::tribes(4, 3, 2),
      boolfn::FunctionSpec::threshold(12, 7.3),
      boolfn::FunctionSpec::counterexample(4, 3, 2, 7.3),
  };
  bool agree = true;
  for (const auto& spec : specs) {
    const std::int64_t n = spec.n();
    auto x = state_from_mask(
        n, rng.engine()() & ((std::uint64_t{1} << n) - 1));
    boolfn::EvalState state(spec, x);
    if (state.value() != boolfn::evaluate(spec, x)) agree = false;
    for (int step = 0; step < 300; ++step) {
      const std::int64_t bit = rng.uniform_below(n);
      const bool next = !x.get(bit);
      x.set(bit, next);
      if (state.apply_flip(bit, next) != boolfn::evaluate(spec, x)) agree = false;
    }
  }
  v.check("boolfn.incremental_vs_direct", agree);

  bool witness_ok = true;
  for (const auto& spec : {boolfn::FunctionSpec::tribes(3, 2, 2),
                           boolfn::FunctionSpec::counterexample(3, 2, 2, 4.5),
                           boolfn::FunctionSpec::threshold(6, 3.0)}) {
    const std::int64_t n = spec.n();
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        const auto witness = boolfn::transitive_witness(spec, i, j);
        if (witness.map_index(i) != j) witness_ok = false;
        const auto sigma = witness.expand();
        auto sorted = sigma;
        std::sort(sorted.begin(), sorted.end());
        for (std::int64_t t = 0; t < n; ++t) {
          if (sorted[t] != t) witness_ok = false;  // bijection
        }
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
          const auto x = state_from_mask(n, mask);
          const auto y = witness.apply(x);
          if (boolfn::evaluate(spec, x) != boolfn::evaluate(spec, y)) {
            witness_ok = false;
          }
        }
      }
    }
  }
  v.check("boolfn.witness_properties", witness_ok);

  // agreement of the counterexample with the bare threshold above H-1
  bool band_ok = true;
  const auto ce = boolfn::FunctionSpec::counterexample(4, 3, 2, 7.3);
  const auto th = boolfn::FunctionSpec::threshold(12, 7.3);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << 12); ++mask) {
    const auto x = state_from_mask(12, mask);
    if (static_cast<double>(x.weight()) >= 7.3 - 1.0) {
      if (boolfn::evaluate(ce, x) != boolfn::evaluate(th, x)) band_ok = false;
    }
  }
  v.check("boolfn.counterexample_threshold_agreement", band_ok);
}

void verify_dynamics(VerifyContext& v) {
  // event validity and bit-identical replay
  bool valid = true;
  std::vector<dynamics::FlipEvent> first_run;
  for (int replay = 0; replay < 2; ++replay) {
    RngStream rng(v.seed, 303);
    auto x = dynamics::sample_stationary(100, 0.3, rng);
    auto shadow = x;
    std::vector<dynamics::FlipEvent> events;
    double last = 0.0;
    dynamics::run_trajectory(x, 0.3, 2.0, rng, [&](const dynamics::FlipEvent& e) {
      if (e.time <= last) valid = false;
      last = e.time;
      if (shadow.get(e.bit) == e.new_value) valid = false;  // must be a true flip
      shadow.set(e.bit, e.new_value);
      events.push_back(e);
      return true;
    });
    if (shadow.weight() != x.weight()) valid = false;
    if (replay == 0) {
      first_run = events;
    } else {
      if (events.size() != first_run.size()) valid = false;
      for (std::size_t i = 0; i < events.size() && valid; ++i) {
        if (events[i].time != first_run[i].time ||
            events[i].bit != first_run[i].bit ||
            events[i].new_value != first_run[i].new_value) {
          valid = false;
        }
      }
    }
  }
  v.check("dynamics.event_validity_and_replay", valid);

  {
    RngStream rng(v.seed, 304);
    auto zeros = dynamics::sample_stationary(64, 0.0, rng);
    const auto events = dynamics::run_trajectory(zeros, 0.0, 1.0, rng);
    v.check("dynamics.frozen_at_p_zero", events == 0 && zeros.weight() == 0);
  }

  {
    RngStream rng(v.seed, 305);
    const auto x0 = dynamics::sample_stationary(64, 0.37, rng);
    const auto same = dynamics::transition_sample(x0, 0.0, 0.37, rng);
    bool identical = same.weight() == x0.weight();
    for (std::int64_t i = 0; i < 64; ++i) {
      if (same.get(i) != x0.get(i)) identical = false;
    }
    v.check("dynamics.transition_t_zero_identity", identical);
  }

  {
    // P(stays 1 | was 1) = e^(-t) + (1 - e^(-t)) p
    RngStream rng(v.seed, 306);
    const double t = 0.7, p = 0.2;
    const std::int64_t n = 200, reps = 2000;
    dynamics::HypercubeState ones(n, dynamics::Storage::dense);
    for (std::int64_t i = 0; i < n; ++i) ones.set(i, true);
    std::int64_t stayed = 0;
    for (std::int64_t rep = 0; rep < reps; ++rep) {
      stayed += dynamics::transition_sample(ones, t, p, rng).weight();
    }
    const double trials = static_cast<double>(n * reps);
    const double expect = std::exp(-t) + (1 - std::exp(-t)) * p;
    const double se = std::sqrt(expect * (1 - expect) / trials);
    const double emp = static_cast<double>(stayed) / trials;
    v.check("dynamics.transition_stay_probability",
            std::abs(emp - expect) < 4 * se,
            "emp=" + serialize::format_real(emp) +
                " expect=" + serialize::format_real(expect));
  }

  {
    // mean event count 2 n p (1-p) over the unit interval
    const std::int64_t n = 100, reps = 20000;
    const double p = 0.3;
    std::vector<std::int64_t> counts(reps);
    parallel_for_index(reps, 0, [&](std::int64_t i) {
      RngStream rng(v.seed, 400000 + static_cast<std::uint64_t>(i));
      auto x = dynamics::sample_stationary(n, p, rng);
      counts[static_cast<std::size_t>(i)] =
          dynamics::run_trajectory(x, p, 1.0, rng);
    });
    numeric::KahanSum sum, sq;
    for (auto c : counts) sum.add(static_cast<double>(c));
    const double mean = sum.value() / static_cast<double>(reps);
    for (auto c : counts) {
      const double d = static_cast<double>(c) - mean;
      sq.add(d * d);
    }
    const double se = std::sqrt(sq.value() / (reps - 1.0) / reps);
    const double expect = 2 * n * p * (1 - p);
    v.check("dynamics.jump_count_mean", std::abs(mean - expect) < 4 * se,
            "mean=" + serialize::format_real(mean));
  }

  {
    // endpoint stationarity at t = 1
    const std::int64_t n = 1000, reps = 20000;
    const double p = 0.01;
    std::vector<std::int64_t> weights(reps);
    parallel_for_index(reps, 0, [&](std::int64_t i) {
      RngStream rng(v.seed, 500000 + static_cast<std::uint64_t>(i));
      auto x = dynamics::sample_stationary(n, p, rng);
      dynamics::run_trajectory(x, p, 1.0, rng);
      weights[static_cast<std::size_t>(i)] = x.weight();
    });
    numeric::KahanSum sum;
    for (auto w : weights) sum.add(static_cast<double>(w));
    const double mean_bit = sum.value() / static_cast<double>(n * reps);
    const double se =
        std::sqrt(p * (1 - p) / static_cast<double>(n * reps));
    bool ok = std::abs(mean_bit - p) < 4 * se;
    numeric::KahanSum sq;
    const double mean_w = sum.value() / static_cast<double>(reps);
    for (auto w : weights) {
      const double d = static_cast<double>(w) - mean_w;
      sq.add(d * d);
    }
    const double var = sq.value() / (reps - 1.0);
    const double expect_var = n * p * (1 - p);
    if (std::abs(var - expect_var) > 0.10 * expect_var) ok = false;
    v.check("dynamics.endpoint_stationarity", ok,
            "mean_bit=" + serialize::format_real(mean_bit) +
                " var=" + serialize::format_real(var));
  }

  {
    // exit-time domination on a small feasible tribes plan
    const auto spec = boolfn::FunctionSpec::tribes(16, 64, 2);
    const double p = 1.0 / 128.0;
    std::vector<double> grid;
    for (int g = 1; g <= 20; ++g) grid.push_back(0.1 * g);
    const auto res = stats::exit_domination_test(spec, p, 2, 3000, grid, 2.5,
                                                 stats::derive_seed(v.seed, 7));
    v.check("dynamics.exit_time_domination", res.pass,
            "max_violation=" + serialize::format_real(res.max_violation));
  }
}

void verify_stats(VerifyContext& v) {
  {
    const auto constant = boolfn::FunctionSpec::threshold(32, 0.0);
    const auto report = stats::mc_campaign(constant, 0.2, 500, v.seed);
    v.check("stats.constant_function",
            report.p_zero == 1.0 && report.mean_c == 0.0);
  }
  {
    const auto parity = boolfn::FunctionSpec::parity(50);
    const auto report = stats::mc_campaign(parity, 0.3, 20000, v.seed);
    const double expect = 2 * 50 * 0.3 * 0.7;
    v.check("stats.parity_mean",
            std::abs(report.mean_c - expect) < 4 * report.se_c,
            "mean=" + serialize::format_real(report.mean_c));
  }
  {
    const auto majority = boolfn::FunctionSpec::majority(9);
    const auto report = stats::mc_campaign(majority, 0.5, 20000, v.seed);
    const auto oracle = exact::influence_bruteforce(majority, 0.5);
    v.check("stats.majority_vs_bruteforce",
            std::abs(report.mean_c - oracle.total) < 4 * report.se_c,
            "mean=" + serialize::format_real(report.mean_c) +
                " oracle=" + serialize::format_real(oracle.total));
  }
  {
    const auto spec = boolfn::FunctionSpec::tribes(4, 3, 2);
    const auto once = stats::mc_campaign(spec, 0.2, 2000, v.seed, 1);
    const auto again = stats::mc_campaign(spec, 0.2, 2000, v.seed, 4);
    serialize::JsonWriter a, b;
    serialize::write_volatility_report(a, once);
    serialize::write_volatility_report(b, again);
    v.check("stats.thread_count_determinism", a.str() == b.str());
  }
}

int cmd_verify(const ExperimentConfig& config, std::ostream& out) {
  VerifyContext v{config.seed.value_or(20260809ull), out};
  verify_params(v);
  verify_exact(v);
  verify_boolfn(v);
  verify_dynamics(v);
  verify_stats(v);
  out << (v.all_ok ? "verify: all checks passed\n"
                   : "verify: FAILURES detected\n");
  return v.all_ok ? kExitOk : kExitVerifyFailure;
}

}  // namespace

params::PSequence parse_pseq(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("pseq: expected power:c,alpha or table:<path>");
  }
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "power") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("pseq: power needs c,alpha");
    }
    return params::PSequence::power_law(
        parse_real_or_fraction(rest.substr(0, comma)),
        parse_real_or_fraction(rest.substr(comma + 1)));
  }
  if (kind == "table") {
    std::ifstream file(rest);
    if (!file) throw std::invalid_argument("pseq: cannot open table " + rest);
    json j = json::parse(file);
    std::vector<std::pair<std::int64_t, double>> rows;
    for (const auto& row : j) {
      rows.emplace_back(row.at(0).get<std::int64_t>(), row.at(1).get<double>());
    }
    return params::PSequence::table(std::move(rows));
  }
  throw std::invalid_argument("pseq: unknown family " + kind);
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot open config file: " + path);
  json j = json::parse(file);

  if (j.contains("command")) {
    const auto name = j["command"].get<std::string>();
    if (name == "params") config.command = Command::params;
    else if (name == "simulate") config.command = Command::simulate;
    else if (name == "influence") config.command = Command::influence;
    else if (name == "sweep") config.command = Command::sweep;
    else if (name == "verify") config.command = Command::verify;
    else throw std::invalid_argument("unknown command in config: " + name);
  }
  if (j.contains("pseq")) {
    if (j["pseq"].is_string()) {
      config.pseq = parse_pseq(j["pseq"].get<std::string>());
    } else {
      const auto& ps = j["pseq"];
      const auto family = ps.at("family").get<std::string>();
      if (family == "power") {
        config.pseq = params::PSequence::power_law(ps.at("c").get<double>(),
                                                   ps.at("alpha").get<double>());
      } else if (family == "table") {
        std::vector<std::pair<std::int64_t, double>> rows;
        for (const auto& row : ps.at("rows")) {
          rows.emplace_back(row.at(0).get<std::int64_t>(),
                            row.at(1).get<double>());
        }
        config.pseq = params::PSequence::table(std::move(rows));
      } else {
        throw std::invalid_argument("unknown pseq family: " + family);
      }
    }
  }
  if (j.contains("r")) config.r = j["r"].get<int>();
  if (j.contains("n")) {
    config.n_values.clear();
    if (j["n"].is_array()) {
      for (const auto& n : j["n"]) config.n_values.push_back(n.get<std::int64_t>());
    } else {
      config.n_values.push_back(j["n"].get<std::int64_t>());
    }
  }
  if (j.contains("n_lo")) config.n_lo = j["n_lo"].get<std::int64_t>();
  if (j.contains("n_hi")) config.n_hi = j["n_hi"].get<std::int64_t>();
  if (j.contains("max_count")) config.max_count = j["max_count"].get<std::size_t>();
  if (j.contains("spec")) config.fspec = spec_from_json(j["spec"]);
  if (j.contains("p")) config.p = j["p"].get<double>();
  if (j.contains("replicas")) config.replicas = j["replicas"].get<std::int64_t>();
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out")) config.out_path = j["out"].get<std::string>();
  if (j.contains("format")) config.format = j["format"].get<std::string>();
  if (j.contains("threads")) config.threads = j["threads"].get<unsigned>();
  if (j.contains("trace")) config.trace_path = j["trace"].get<std::string>();
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.format != "csv" && config.format != "json") {
      throw std::invalid_argument("format must be csv or json");
    }
    switch (config.command) {
      case Command::params:
        return cmd_params(config, out);
      case Command::simulate:
        return cmd_simulate(config, out);
      case Command::influence:
        return cmd_influence(config, out);
      case Command::sweep:
        return cmd_sweep(config, out);
      case Command::verify:
        return cmd_verify(config, out);
    }
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

int run(const ExperimentConfig& config) {
  return run(config, std::cout, std::cerr);
}

}  // namespace volatility::cli
