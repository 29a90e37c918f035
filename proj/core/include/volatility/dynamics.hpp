#pragma once

#include <cstdint>
#include <optional>

#include "volatility/boolfn.hpp"
#include "volatility/rng.hpp"
#include "volatility/state.hpp"

namespace volatility::dynamics {

// One materialized bit flip. Refreshes that resample the current value are
// invisible to every statistic computed here and are never generated; the
// induced per-bit law is the two-state chain with hold rates p at 0 and
// 1-p at 1, identical to rate-1 refresh with Bernoulli(p) resampling.
struct FlipEvent {
  double time;
  std::int64_t bit;
  bool new_value;
};

// stationary product measure: bits i.i.d. Bernoulli(p)
HypercubeState sample_stationary(std::int64_t n, double p, RngStream& rng);
HypercubeState sample_stationary(std::int64_t n, double p, RngStream& rng,
                                 Storage mode);

// Event-driven walk over [0, horizon): two competing aggregate exponential
// clocks with rates (n-weight)*p (a zero turns one) and weight*(1-p) (a one
// turns zero); the flipped side member is chosen uniformly. on_flip receives
// each event in strictly increasing time order and may return false to stop
// early. Returns the number of events delivered.
template <class OnFlip>
std::int64_t run_trajectory(HypercubeState& x, double p, double horizon,
                            RngStream& rng, OnFlip&& on_flip) {
  const auto n = static_cast<double>(x.n());
  double t = 0.0;
  std::int64_t events = 0;
  while (true) {
    const auto w = static_cast<double>(x.weight());
    const double rate_up = (n - w) * p;
    const double rate_down = w * (1.0 - p);
    const double total = rate_up + rate_down;
    if (total <= 0.0) break;
    t += rng.exponential(total);
    if (t >= horizon) break;
    const bool up = rng.uniform01() * total < rate_up;
    const std::int64_t bit = up ? x.random_zero(rng) : x.random_one(rng);
    x.set(bit, up);
    ++events;
    if (!on_flip(FlipEvent{t, bit, up})) break;
  }
  return events;
}

inline std::int64_t run_trajectory(HypercubeState& x, double p, double horizon,
                                   RngStream& rng) {
  return run_trajectory(x, p, horizon, rng, [](const FlipEvent&) { return true; });
}

// Fixed-time transition: each bit independently keeps its value with
// probability e^(-t), else resamples Bernoulli(p).
HypercubeState transition_sample(const HypercubeState& x0, double t, double p,
                                 RngStream& rng);

// Change count of f over the unit interval from a stationary start; the
// time-zero evaluation is not counted.
std::int64_t count_changes(const boolfn::FunctionSpec& spec, double p,
                           RngStream& rng);

struct ExitSample {
  double time;    // exit time, or t_max when censored
  bool censored;
};

// First time g drops to 0 from a stationary start conditioned on g = 1
// (rejection sampling, throws std::runtime_error when the attempt budget is
// exhausted). Results beyond t_max are censored.
ExitSample first_exit_time(const boolfn::FunctionSpec& tribes_spec, double p,
                           RngStream& rng, double t_max,
                           int attempt_budget = 10000);

}  // namespace volatility::dynamics
