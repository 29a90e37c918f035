// Command-line front end: params | simulate | influence | sweep | verify.
// Settings come from flags or from a JSON config file (--config); flags
// override the file.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "volatility/cli.hpp"
#include "volatility/version.hpp"

namespace {

using volatility::cli::Command;
using volatility::cli::ExperimentConfig;

struct Flags {
  std::string config_path;
  std::string pseq;
  std::optional<int> r;
  std::vector<std::int64_t> n_values;
  std::optional<std::int64_t> n_lo, n_hi;
  std::optional<std::size_t> max_count;
  std::string spec_variant;
  std::optional<std::int64_t> n_for_spec;  // reused --n for spec commands
  std::optional<std::int64_t> ell, k;
  std::optional<double> H;
  std::optional<std::int64_t> T;
  std::optional<double> p;
  std::optional<std::int64_t> replicas;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
  std::optional<unsigned> threads;
  std::string trace_path;
};

void add_common_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file; flags override");
  cmd->add_option("--seed", flags.seed, "base RNG seed (required for simulate/sweep)");
  cmd->add_option("--replicas", flags.replicas, "Monte Carlo replica count");
  cmd->add_option("--out", flags.out_path, "artifact output path");
  cmd->add_option("--format", flags.format, "artifact format: csv|json");
  cmd->add_option("--threads", flags.threads,
                  "worker threads (default: VOLATILITY_THREADS or hardware)");
}

void add_pseq_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--pseq", flags.pseq,
                  "bias family, power:c,alpha (alpha may be a fraction) or "
                  "table:<json path>");
  cmd->add_option("--r", flags.r, "tribes quorum r >= 2");
  cmd->add_option("--n", flags.n_values, "n value(s)")->delimiter(',');
  cmd->add_option("--n-lo", flags.n_lo, "range start");
  cmd->add_option("--n-hi", flags.n_hi, "range end");
  cmd->add_option("--max-count", flags.max_count, "cap on plans from a range");
}

void add_spec_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--spec", flags.spec_variant,
                  "dictator|parity|majority|tribes|threshold|counterexample");
  cmd->add_option("--n", flags.n_for_spec, "input length n");
  cmd->add_option("--ell", flags.ell, "tribe size");
  cmd->add_option("--k", flags.k, "tribe count");
  cmd->add_option("--r", flags.r, "tribes quorum");
  cmd->add_option("--H", flags.H, "weight threshold (real)");
  cmd->add_option("--T", flags.T, "integer weight threshold (sets H = T)");
  cmd->add_option("--p", flags.p, "bit bias p");
}

volatility::boolfn::FunctionSpec spec_from_flags(const Flags& flags) {
  using volatility::boolfn::FunctionSpec;
  const auto& v = flags.spec_variant;
  const auto need_n = [&]() -> std::int64_t {
    if (!flags.n_for_spec) throw CLI::ValidationError("--n is required for " + v);
    return *flags.n_for_spec;
  };
  const auto need_height = [&]() -> double {
    if (flags.H) return *flags.H;
    if (flags.T) return static_cast<double>(*flags.T);
    throw CLI::ValidationError("--H or --T is required for " + v);
  };
  if (v == "dictator") return FunctionSpec::dictator(need_n());
  if (v == "parity") return FunctionSpec::parity(need_n());
  if (v == "majority") return FunctionSpec::majority(need_n());
  if (v == "tribes") {
    if (!flags.ell || !flags.k) {
      throw CLI::ValidationError("tribes needs --ell and --k");
    }
    return FunctionSpec::tribes(*flags.ell, *flags.k, flags.r.value_or(2));
  }
  if (v == "threshold") return FunctionSpec::threshold(need_n(), need_height());
  if (v == "counterexample") {
    if (!flags.ell || !flags.k) {
      throw CLI::ValidationError("counterexample needs --ell and --k");
    }
    return FunctionSpec::counterexample(*flags.ell, *flags.k,
                                        flags.r.value_or(2), need_height());
  }
  throw CLI::ValidationError("unknown --spec variant: " + v);
}

ExperimentConfig build_config(Command command, const Flags& flags) {
  ExperimentConfig config;
  config.command = command;
  if (!flags.config_path.empty()) {
    volatility::cli::apply_config_file(config, flags.config_path);
    config.command = command;  // the subcommand wins over the file
  }
  if (!flags.pseq.empty()) config.pseq = volatility::cli::parse_pseq(flags.pseq);
  if (flags.r) config.r = *flags.r;
  if (!flags.n_values.empty()) config.n_values = flags.n_values;
  if (flags.n_lo) config.n_lo = flags.n_lo;
  if (flags.n_hi) config.n_hi = flags.n_hi;
  if (flags.max_count) config.max_count = *flags.max_count;
  if (!flags.spec_variant.empty()) config.fspec = spec_from_flags(flags);
  if (flags.p) config.p = flags.p;
  if (flags.replicas) config.replicas = *flags.replicas;
  if (flags.seed) config.seed = flags.seed;
  if (!flags.out_path.empty()) config.out_path = flags.out_path;
  if (!flags.format.empty()) config.format = flags.format;
  if (flags.threads) config.threads = *flags.threads;
  if (!flags.trace_path.empty()) config.trace_path = flags.trace_path;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-biased hypercube dynamics and Boolean-function volatility lab"};
  app.set_version_flag("--version", volatility::kVersion);
  app.require_subcommand(1);

  Flags flags;

  auto* params = app.add_subcommand(
      "params", "tribe/threshold plans, assumption and condition checks");
  add_pseq_flags(params, flags);
  add_common_flags(params, flags);

  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo campaign of unit-interval change counts");
  add_spec_flags(simulate, flags);
  add_common_flags(simulate, flags);
  simulate->add_option("--trace", flags.trace_path,
                       "write replica 0's trajectory CSV here");

  auto* influence = app.add_subcommand(
      "influence", "exact formulas and brute-force influence profiles");
  add_spec_flags(influence, flags);
  add_common_flags(influence, flags);

  auto* sweep = app.add_subcommand(
      "sweep", "counterexample family sweep with exact and empirical columns");
  add_pseq_flags(sweep, flags);
  add_common_flags(sweep, flags);

  auto* verify = app.add_subcommand(
      "verify", "run the built-in oracle suite and report each check");
  add_common_flags(verify, flags);

  CLI11_PARSE(app, argc, argv);

  Command command = Command::verify;
  if (params->parsed()) command = Command::params;
  if (simulate->parsed()) command = Command::simulate;
  if (influence->parsed()) command = Command::influence;
  if (sweep->parsed()) command = Command::sweep;
  if (verify->parsed()) command = Command::verify;

  try {
    return volatility::cli::run(build_config(command, flags));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return volatility::cli::kExitValidation;
  }
}
