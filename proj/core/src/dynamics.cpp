#include "volatility/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace volatility::dynamics {

namespace {

// w distinct uniform indices set to one; complement path when w is the
// larger side (dense only; sparse states never carry w > n/2 in practice)
void fill_random_subset(HypercubeState& x, std::int64_t w, RngStream& rng) {
  const std::int64_t n = x.n();
  if (w <= 0) return;
  if (x.storage() == Storage::dense && w > n / 2) {
    for (std::int64_t i = 0; i < n; ++i) x.set(i, true);
    std::int64_t cleared = 0;
    while (cleared < n - w) {
      const std::int64_t i = rng.uniform_below(n);
      if (x.get(i)) {
        x.set(i, false);
        ++cleared;
      }
    }
    return;
  }
  std::int64_t placed = 0;
  while (placed < w) {
    const std::int64_t i = rng.uniform_below(n);
    if (!x.get(i)) {
      x.set(i, true);
      ++placed;
    }
  }
}

}  // namespace

HypercubeState sample_stationary(std::int64_t n, double p, RngStream& rng,
                                 Storage mode) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("sample_stationary: p must lie in [0,1]");
  }
  HypercubeState x(n, mode);
  if (p == 0.0) return x;
  if (p == 1.0) {
    if (mode == Storage::sparse) {
      throw std::invalid_argument("sample_stationary: p = 1 needs dense storage");
    }
    for (std::int64_t i = 0; i < n; ++i) x.set(i, true);
    return x;
  }
  if (p <= 0.25 || mode == Storage::sparse) {
    fill_random_subset(x, rng.binomial(n, p), rng);
    return x;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    if (rng.bernoulli(p)) x.set(i, true);
  }
  return x;
}

HypercubeState sample_stationary(std::int64_t n, double p, RngStream& rng) {
  return sample_stationary(n, p, rng, HypercubeState::choose_storage(n, p));
}

HypercubeState transition_sample(const HypercubeState& x0, double t, double p,
                                 RngStream& rng) {
  if (t < 0.0) throw std::invalid_argument("transition_sample: t must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("transition_sample: p must lie in [0,1]");
  }
  const double keep = std::exp(-t);
  if (x0.storage() == Storage::dense) {
    HypercubeState x = x0;
    for (std::int64_t i = 0; i < x.n(); ++i) {
      if (!rng.bernoulli(keep)) x.set(i, rng.bernoulli(p));
    }
    return x;
  }

  // sparse: ones survive with prob keep + (1-keep)p; refreshed zeros turn one
  // independently with prob (1-keep)p, i.e. a binomial batch of fresh ones
  const double stay = keep + (1.0 - keep) * p;
  const double fresh = (1.0 - keep) * p;
  const std::int64_t n = x0.n();
  const std::int64_t zeros = n - x0.weight();

  std::vector<std::int64_t> to_insert;
  const std::int64_t m = rng.binomial(zeros, fresh);
  to_insert.reserve(static_cast<std::size_t>(m));
  std::unordered_set<std::int64_t> chosen;
  while (static_cast<std::int64_t>(to_insert.size()) < m) {
    const std::int64_t i = rng.uniform_below(n);
    if (x0.get(i) || chosen.count(i)) continue;
    chosen.insert(i);
    to_insert.push_back(i);
  }

  HypercubeState x = x0;
  const std::vector<std::int64_t> original_ones = x0.ones().elements();
  for (std::int64_t one : original_ones) {
    if (!rng.bernoulli(stay)) x.set(one, false);
  }
  for (std::int64_t i : to_insert) x.set(i, true);
  return x;
}

std::int64_t count_changes(const boolfn::FunctionSpec& spec, double p,
                           RngStream& rng) {
  HypercubeState x = sample_stationary(spec.n(), p, rng);
  boolfn::EvalState state(spec, x);
  int prev = state.value();
  std::int64_t changes = 0;
  run_trajectory(x, p, 1.0, rng, [&](const FlipEvent& e) {
    const int v = state.apply_flip(e.bit, e.new_value);
    if (v != prev) {
      ++changes;
      prev = v;
    }
    return true;
  });
  return changes;
}

ExitSample first_exit_time(const boolfn::FunctionSpec& tribes_spec, double p,
                           RngStream& rng, double t_max, int attempt_budget) {
  for (int attempt = 0; attempt < attempt_budget; ++attempt) {
    HypercubeState x = sample_stationary(tribes_spec.n(), p, rng);
    boolfn::EvalState state(tribes_spec, x);
    if (state.value() != 1) continue;
    double exit_time = -1.0;
    run_trajectory(x, p, t_max, rng, [&](const FlipEvent& e) {
      if (state.apply_flip(e.bit, e.new_value) == 0) {
        exit_time = e.time;
        return false;
      }
      return true;
    });
    if (exit_time >= 0.0) return ExitSample{exit_time, false};
    return ExitSample{t_max, true};
  }
  throw std::runtime_error(
      "first_exit_time: rejection budget exhausted, P(g=1) too small");
}

}  // namespace volatility::dynamics
