#pragma once

#include <cstdint>
#include <unordered_map>
#include <variant>
#include <vector>

#include "volatility/state.hpp"

namespace volatility::boolfn {

struct Dictator {};
struct Parity {};
struct Majority {};

// 1 iff some tribe (contiguous block of ell indices) holds at least r ones.
struct Tribes {
  std::int64_t ell;
  std::int64_t k;
  int r;
};

// 1 iff the Hamming weight is at least H. H stays real; weight comparisons
// are exact integer-vs-real. H = 0 gives the constant-one function.
struct Threshold {
  double H;
};

// tribes value gated below H-1, constant 1 at weight >= H, 0 in [H-1, H).
struct Counterexample {
  std::int64_t ell;
  std::int64_t k;
  int r;
  double H;
};

class FunctionSpec {
 public:
  using Variant =
      std::variant<Dictator, Parity, Majority, Tribes, Threshold, Counterexample>;

  FunctionSpec() : variant_(Dictator{}), n_(1) {}

  static FunctionSpec dictator(std::int64_t n);
  static FunctionSpec parity(std::int64_t n);
  static FunctionSpec majority(std::int64_t n);  // n must be odd
  static FunctionSpec tribes(std::int64_t ell, std::int64_t k, int r);
  static FunctionSpec threshold(std::int64_t n, double H);
  static FunctionSpec counterexample(std::int64_t ell, std::int64_t k, int r,
                                     double H);

  std::int64_t n() const { return n_; }
  const Variant& variant() const { return variant_; }

  bool tribes_like() const {
    return std::holds_alternative<Tribes>(variant_) ||
           std::holds_alternative<Counterexample>(variant_);
  }
  // tribe block length for tribes-like variants
  std::int64_t tribe_len() const;
  int quorum() const;

 private:
  FunctionSpec(Variant v, std::int64_t n) : variant_(v), n_(n) {}
  Variant variant_;
  std::int64_t n_;
};

// direct evaluation; O(weight) for sparse states, O(n) worst case dense
int evaluate(const FunctionSpec& spec, const dynamics::HypercubeState& x);

// Incremental evaluation companion to a trajectory: constant expected work
// per flip regardless of n and k. The caller owns the actual configuration
// and must only report true flips (new_value differing from the old bit).
class EvalState {
 public:
  EvalState(const FunctionSpec& spec, const dynamics::HypercubeState& x);

  int value() const { return value_; }
  std::int64_t weight() const { return weight_; }
  std::int64_t convinced() const { return convinced_; }
  const std::unordered_map<std::int64_t, std::int32_t>& tribe_counts() const {
    return tribe_counts_;
  }

  // returns the new function value
  int apply_flip(std::int64_t bit, bool new_value);

 private:
  void recompute_value();

  FunctionSpec spec_;
  std::int64_t weight_ = 0;
  std::unordered_map<std::int64_t, std::int32_t> tribe_counts_;  // nonzero only
  std::int64_t convinced_ = 0;  // tribes at or above quorum
  int value_ = 0;
};

inline EvalState incremental_new(const FunctionSpec& spec,
                                 const dynamics::HypercubeState& x) {
  return EvalState(spec, x);
}

inline int incremental_flip(EvalState& state, std::int64_t bit, bool new_value) {
  return state.apply_flip(bit, new_value);
}

// Coordinate symmetry sigma with sigma(i) = j and f(sigma(x)) = f(x).
// BlockSwap exchanges two tribes, anchored so that i maps to j and the
// remaining elements pair up in increasing order; all kinds are involutions.
class PermutationWitness {
 public:
  enum class Kind { identity, transposition, block_swap };

  static PermutationWitness identity(std::int64_t n);
  static PermutationWitness transposition(std::int64_t n, std::int64_t i,
                                          std::int64_t j);
  static PermutationWitness block_swap(std::int64_t n, std::int64_t ell,
                                       std::int64_t i, std::int64_t j);

  Kind kind() const { return kind_; }
  std::int64_t n() const { return n_; }

  std::int64_t map_index(std::int64_t t) const;  // sigma(t), O(1)
  std::vector<std::int64_t> expand() const;      // full sigma, small n only

  // state with bits permuted by sigma: result(t) = x(sigma(t))
  dynamics::HypercubeState apply(const dynamics::HypercubeState& x) const;

 private:
  PermutationWitness(Kind kind, std::int64_t n) : kind_(kind), n_(n) {}
  Kind kind_;
  std::int64_t n_;
  std::int64_t i_ = 0, j_ = 0;   // transposition / anchor pair
  std::int64_t ell_ = 0;         // block length for block_swap
  std::int64_t tribe_a_ = 0, tribe_b_ = 0;
};

PermutationWitness transitive_witness(const FunctionSpec& spec, std::int64_t i,
                                      std::int64_t j);

}  // namespace volatility::boolfn
