#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "volatility/boolfn.hpp"
#include "volatility/params.hpp"

namespace volatility::cli {

enum class Command { params, simulate, influence, sweep, verify };

// exit codes of run()
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitVerifyFailure = 3;

struct ExperimentConfig {
  Command command = Command::verify;
  std::optional<params::PSequence> pseq;
  int r = 2;
  std::vector<std::int64_t> n_values;  // explicit n list
  std::optional<std::int64_t> n_lo;    // or a range
  std::optional<std::int64_t> n_hi;
  std::size_t max_count = 16;
  std::optional<boolfn::FunctionSpec> fspec;
  std::optional<double> p;
  std::int64_t replicas = 10000;
  std::optional<std::uint64_t> seed;  // mandatory for simulate/sweep
  std::string out_path;               // artifact file; empty = stdout only
  std::string format = "csv";         // csv | json
  unsigned threads = 0;               // 0 = VOLATILITY_THREADS or hardware
  std::string trace_path;             // optional trajectory CSV (simulate)
};

// "power:c,alpha" (alpha accepts fractions like 2/3) or "table:<json path>"
params::PSequence parse_pseq(const std::string& text);

// merge settings from a JSON config file; fields present in the file are
// applied, everything else keeps its current value
void apply_config_file(ExperimentConfig& config, const std::string& path);

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int run(const ExperimentConfig& config);  // stdout/stderr

}  // namespace volatility::cli
