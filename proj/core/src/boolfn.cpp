#include "volatility/boolfn.hpp"

#include <cmath>
#include <stdexcept>

namespace volatility::boolfn {

namespace {

void check_tribes_args(std::int64_t ell, std::int64_t k, int r) {
  if (ell < 2) throw std::invalid_argument("tribes: ell must be >= 2");
  if (k < 1) throw std::invalid_argument("tribes: k must be >= 1");
  if (r < 2) throw std::invalid_argument("tribes: r must be >= 2");
}

void check_height(double H, std::int64_t n) {
  if (!(H >= 0.0 && H <= static_cast<double>(n))) {
    throw std::invalid_argument("threshold: H must lie in [0, n]");
  }
}

}  // namespace

FunctionSpec FunctionSpec::dictator(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("dictator: n must be positive");
  return FunctionSpec(Dictator{}, n);
}

FunctionSpec FunctionSpec::parity(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("parity: n must be positive");
  return FunctionSpec(Parity{}, n);
}

FunctionSpec FunctionSpec::majority(std::int64_t n) {
  if (n < 1 || n % 2 == 0) {
    throw std::invalid_argument("majority: n must be positive and odd");
  }
  return FunctionSpec(Majority{}, n);
}

FunctionSpec FunctionSpec::tribes(std::int64_t ell, std::int64_t k, int r) {
  check_tribes_args(ell, k, r);
  return FunctionSpec(Tribes{ell, k, r}, ell * k);
}

FunctionSpec FunctionSpec::threshold(std::int64_t n, double H) {
  if (n < 1) throw std::invalid_argument("threshold: n must be positive");
  check_height(H, n);
  return FunctionSpec(Threshold{H}, n);
}

FunctionSpec FunctionSpec::counterexample(std::int64_t ell, std::int64_t k, int r,
                                          double H) {
  check_tribes_args(ell, k, r);
  check_height(H, ell * k);
  return FunctionSpec(Counterexample{ell, k, r, H}, ell * k);
}

std::int64_t FunctionSpec::tribe_len() const {
  if (const auto* t = std::get_if<Tribes>(&variant_)) return t->ell;
  if (const auto* c = std::get_if<Counterexample>(&variant_)) return c->ell;
  throw std::logic_error("tribe_len: variant has no tribes");
}

int FunctionSpec::quorum() const {
  if (const auto* t = std::get_if<Tribes>(&variant_)) return t->r;
  if (const auto* c = std::get_if<Counterexample>(&variant_)) return c->r;
  throw std::logic_error("quorum: variant has no tribes");
}

namespace {

// 1 iff some contiguous block of length ell holds at least r ones
int tribes_value(const dynamics::HypercubeState& x, std::int64_t ell, int r) {
  std::unordered_map<std::int64_t, std::int32_t> counts;
  int result = 0;
  x.for_each_one([&](std::int64_t i) {
    if (result) return;
    if (++counts[i / ell] >= r) result = 1;
  });
  return result;
}

int compose_counterexample(std::int64_t weight, double H, int g_value) {
  const auto w = static_cast<double>(weight);
  if (w >= H) return 1;
  if (w >= H - 1.0) return 0;
  return g_value;
}

}  // namespace

int evaluate(const FunctionSpec& spec, const dynamics::HypercubeState& x) {
  if (x.n() != spec.n()) {
    throw std::invalid_argument("evaluate: state length does not match spec");
  }
  const std::int64_t w = x.weight();
  struct Visitor {
    const FunctionSpec& spec;
    const dynamics::HypercubeState& x;
    std::int64_t w;
    int operator()(const Dictator&) const { return x.get(0) ? 1 : 0; }
    int operator()(const Parity&) const {
      return ((spec.n() - w) % 2 == 0) ? 1 : 0;  // 1 iff #zeros even
    }
    int operator()(const Majority&) const { return 2 * w > spec.n() ? 1 : 0; }
    int operator()(const Tribes& t) const { return tribes_value(x, t.ell, t.r); }
    int operator()(const Threshold& t) const {
      return static_cast<double>(w) >= t.H ? 1 : 0;
    }
    int operator()(const Counterexample& c) const {
      const double dw = static_cast<double>(w);
      if (dw >= c.H) return 1;
      if (dw >= c.H - 1.0) return 0;
      return tribes_value(x, c.ell, c.r);
    }
  };
  return std::visit(Visitor{spec, x, w}, spec.variant());
}

EvalState::EvalState(const FunctionSpec& spec, const dynamics::HypercubeState& x)
    : spec_(spec) {
  if (x.n() != spec.n()) {
    throw std::invalid_argument("EvalState: state length does not match spec");
  }
  weight_ = x.weight();
  if (spec_.tribes_like()) {
    const std::int64_t ell = spec_.tribe_len();
    const int r = spec_.quorum();
    x.for_each_one([&](std::int64_t i) {
      if (++tribe_counts_[i / ell] == r) ++convinced_;
    });
  }
  if (std::holds_alternative<Dictator>(spec_.variant())) {
    value_ = x.get(0) ? 1 : 0;
  } else {
    recompute_value();
  }
}

void EvalState::recompute_value() {
  struct Visitor {
    const EvalState& s;
    int operator()(const Dictator&) const { return s.value_; }  // flip-driven
    int operator()(const Parity&) const {
      return ((s.spec_.n() - s.weight_) % 2 == 0) ? 1 : 0;
    }
    int operator()(const Majority&) const {
      return 2 * s.weight_ > s.spec_.n() ? 1 : 0;
    }
    int operator()(const Tribes&) const { return s.convinced_ > 0 ? 1 : 0; }
    int operator()(const Threshold& t) const {
      return static_cast<double>(s.weight_) >= t.H ? 1 : 0;
    }
    int operator()(const Counterexample& c) const {
      return compose_counterexample(s.weight_, c.H, s.convinced_ > 0 ? 1 : 0);
    }
  };
  value_ = std::visit(Visitor{*this}, spec_.variant());
}

int EvalState::apply_flip(std::int64_t bit, bool new_value) {
  if (bit < 0 || bit >= spec_.n()) {
    throw std::out_of_range("apply_flip: bit index out of range");
  }
  const int delta = new_value ? 1 : -1;
  if (weight_ + delta < 0 || weight_ + delta > spec_.n()) {
    throw std::logic_error("apply_flip: weight out of range, not a true flip");
  }
  weight_ += delta;

  if (spec_.tribes_like()) {
    const std::int64_t tribe = bit / spec_.tribe_len();
    const int r = spec_.quorum();
    auto it = tribe_counts_.try_emplace(tribe, 0).first;
    const std::int32_t next = it->second + delta;
    if (next < 0 || next > spec_.tribe_len()) {
      throw std::logic_error("apply_flip: tribe count out of range, not a true flip");
    }
    if (delta > 0 && next == r) ++convinced_;
    if (delta < 0 && next == r - 1) --convinced_;
    if (next == 0) {
      tribe_counts_.erase(it);
    } else {
      it->second = next;
    }
  }

  if (std::holds_alternative<Dictator>(spec_.variant())) {
    if (bit == 0) value_ = new_value ? 1 : 0;
    return value_;
  }
  recompute_value();
  return value_;
}

PermutationWitness PermutationWitness::identity(std::int64_t n) {
  return PermutationWitness(Kind::identity, n);
}

PermutationWitness PermutationWitness::transposition(std::int64_t n,
                                                     std::int64_t i,
                                                     std::int64_t j) {
  PermutationWitness w(Kind::transposition, n);
  w.i_ = i;
  w.j_ = j;
  return w;
}

PermutationWitness PermutationWitness::block_swap(std::int64_t n,
                                                  std::int64_t ell,
                                                  std::int64_t i,
                                                  std::int64_t j) {
  PermutationWitness w(Kind::block_swap, n);
  w.i_ = i;
  w.j_ = j;
  w.ell_ = ell;
  w.tribe_a_ = i / ell;
  w.tribe_b_ = j / ell;
  return w;
}

std::int64_t PermutationWitness::map_index(std::int64_t t) const {
  switch (kind_) {
    case Kind::identity:
      return t;
    case Kind::transposition:
      if (t == i_) return j_;
      if (t == j_) return i_;
      return t;
    case Kind::block_swap: {
      const std::int64_t tribe = t / ell_;
      if (tribe != tribe_a_ && tribe != tribe_b_) return t;
      if (t == i_) return j_;
      if (t == j_) return i_;
      const bool in_a = tribe == tribe_a_;
      const std::int64_t anchor = in_a ? i_ : j_;
      const std::int64_t other_anchor = in_a ? j_ : i_;
      const std::int64_t other_base = (in_a ? tribe_b_ : tribe_a_) * ell_;
      const std::int64_t off = t - tribe * ell_;
      const std::int64_t anchor_off = anchor - tribe * ell_;
      const std::int64_t other_anchor_off = other_anchor - other_base;
      // rank among the block minus its anchor, then re-insert on the far side
      const std::int64_t rank = off - (off > anchor_off ? 1 : 0);
      const std::int64_t target_off = rank + (rank >= other_anchor_off ? 1 : 0);
      return other_base + target_off;
    }
  }
  return t;
}

std::vector<std::int64_t> PermutationWitness::expand() const {
  if (n_ > (1 << 24)) {
    throw std::invalid_argument("expand: permutation too large to materialize");
  }
  std::vector<std::int64_t> sigma(static_cast<std::size_t>(n_));
  for (std::int64_t t = 0; t < n_; ++t) {
    sigma[static_cast<std::size_t>(t)] = map_index(t);
  }
  return sigma;
}

dynamics::HypercubeState PermutationWitness::apply(
    const dynamics::HypercubeState& x) const {
  dynamics::HypercubeState out(x.n(), x.storage());
  // result(t) = x(sigma(t)); every witness kind is an involution
  x.for_each_one([&](std::int64_t one) { out.set(map_index(one), true); });
  return out;
}

PermutationWitness transitive_witness(const FunctionSpec& spec, std::int64_t i,
                                      std::int64_t j) {
  if (i < 0 || i >= spec.n() || j < 0 || j >= spec.n()) {
    throw std::out_of_range("transitive_witness: index out of range");
  }
  if (i == j) return PermutationWitness::identity(spec.n());

  struct Visitor {
    const FunctionSpec& spec;
    std::int64_t i, j;
    PermutationWitness operator()(const Dictator&) const {
      throw std::invalid_argument("transitive_witness: dictator is not transitive");
    }
    PermutationWitness operator()(const Parity&) const {
      return PermutationWitness::transposition(spec.n(), i, j);
    }
    PermutationWitness operator()(const Majority&) const {
      return PermutationWitness::transposition(spec.n(), i, j);
    }
    PermutationWitness operator()(const Threshold&) const {
      return PermutationWitness::transposition(spec.n(), i, j);  // symmetric
    }
    PermutationWitness tribes_witness(std::int64_t ell) const {
      if (i / ell == j / ell) {
        return PermutationWitness::transposition(spec.n(), i, j);
      }
      return PermutationWitness::block_swap(spec.n(), ell, i, j);
    }
    PermutationWitness operator()(const Tribes& t) const {
      return tribes_witness(t.ell);
    }
    PermutationWitness operator()(const Counterexample& c) const {
      return tribes_witness(c.ell);
    }
  };
  return std::visit(Visitor{spec, i, j}, spec.variant());
}

}  // namespace volatility::boolfn
