#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "volatility/rng.hpp"

namespace volatility::dynamics {

// Set of int64 indices with O(1) expected membership/insert/erase and O(1)
// uniform random element selection (swap-with-last on erase).
class IndexedSet {
 public:
  void reserve(std::size_t n) {
    slots_.reserve(n);
    pos_.reserve(n);
  }

  bool contains(std::int64_t v) const { return pos_.find(v) != pos_.end(); }

  bool insert(std::int64_t v) {
    auto [it, fresh] = pos_.try_emplace(v, slots_.size());
    if (!fresh) return false;
    slots_.push_back(v);
    return true;
  }

  bool erase(std::int64_t v) {
    auto it = pos_.find(v);
    if (it == pos_.end()) return false;
    const std::size_t idx = it->second;
    const std::int64_t last = slots_.back();
    slots_[idx] = last;
    pos_[last] = idx;
    slots_.pop_back();
    pos_.erase(it);
    return true;
  }

  std::int64_t size() const { return static_cast<std::int64_t>(slots_.size()); }
  bool empty() const { return slots_.empty(); }

  std::int64_t pick(RngStream& rng) const {
    return slots_[static_cast<std::size_t>(rng.uniform_below(size()))];
  }

  const std::vector<std::int64_t>& elements() const { return slots_; }

 private:
  std::vector<std::int64_t> slots_;
  std::unordered_map<std::int64_t, std::size_t> pos_;
};

enum class Storage { dense, sparse };

// Configuration x in {0,1}^n with tracked Hamming weight. Dense mode stores a
// bit array; sparse mode stores the set of ones and admits n up to 10^12.
class HypercubeState {
 public:
  HypercubeState(std::int64_t n, Storage mode) : n_(n), mode_(mode) {
    if (n < 1) throw std::invalid_argument("HypercubeState: n must be positive");
    if (mode == Storage::dense) {
      bits_.assign(static_cast<std::size_t>((n + 63) / 64), 0);
    }
  }

  // Sparse pays off when the ones population is thin and n is big.
  static Storage choose_storage(std::int64_t n, double p) {
    return (p <= 0.25 && n > (1 << 16)) ? Storage::sparse : Storage::dense;
  }

  std::int64_t n() const { return n_; }
  std::int64_t weight() const { return weight_; }
  Storage storage() const { return mode_; }

  bool get(std::int64_t i) const {
    check_index(i);
    if (mode_ == Storage::sparse) return ones_.contains(i);
    return (bits_[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1u;
  }

  void set(std::int64_t i, bool v) {
    check_index(i);
    if (mode_ == Storage::sparse) {
      if (v ? ones_.insert(i) : ones_.erase(i)) weight_ += v ? 1 : -1;
      return;
    }
    auto& word = bits_[static_cast<std::size_t>(i >> 6)];
    const std::uint64_t mask = 1ull << (i & 63);
    if (((word & mask) != 0) == v) return;
    word ^= mask;
    weight_ += v ? 1 : -1;
  }

  // Uniform random index among the ones. Caller guarantees weight > 0.
  std::int64_t random_one(RngStream& rng) const {
    if (mode_ == Storage::sparse) return ones_.pick(rng);
    return dense_select(rng, true);
  }

  // Uniform random index among the zeros. Caller guarantees weight < n.
  std::int64_t random_zero(RngStream& rng) const {
    if (mode_ == Storage::sparse) {
      // rejection against the ones set; expected retries n/(n-weight)
      while (true) {
        const std::int64_t i = rng.uniform_below(n_);
        if (!ones_.contains(i)) return i;
      }
    }
    return dense_select(rng, false);
  }

  const IndexedSet& ones() const {
    if (mode_ != Storage::sparse) {
      throw std::logic_error("HypercubeState: ones() requires sparse storage");
    }
    return ones_;
  }

  template <class Fn>
  void for_each_one(Fn&& fn) const {
    if (mode_ == Storage::sparse) {
      for (std::int64_t i : ones_.elements()) fn(i);
      return;
    }
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      std::uint64_t word = bits_[w];
      while (word) {
        const int b = std::countr_zero(word);
        fn(static_cast<std::int64_t>(w * 64 + static_cast<std::size_t>(b)));
        word &= word - 1;
      }
    }
  }

 private:
  void check_index(std::int64_t i) const {
    if (i < 0 || i >= n_) throw std::out_of_range("HypercubeState: bad index");
  }

  // Uniform pick of a one (or zero): rejection when both populations are fat,
  // rank selection by word scan otherwise.
  std::int64_t dense_select(RngStream& rng, bool target) const {
    const std::int64_t population = target ? weight_ : n_ - weight_;
    if (std::min(weight_, n_ - weight_) >= n_ / 8) {
      while (true) {
        const std::int64_t i = rng.uniform_below(n_);
        if (get(i) == target) return i;
      }
    }
    std::int64_t rank = rng.uniform_below(population);
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      std::uint64_t word = bits_[w];
      if (!target) {
        word = ~word;
        if (w + 1 == bits_.size() && (n_ & 63)) {
          word &= (1ull << (n_ & 63)) - 1;  // mask the tail beyond n
        }
      }
      const int cnt = std::popcount(word);
      if (rank >= cnt) {
        rank -= cnt;
        continue;
      }
      while (word) {
        const int b = std::countr_zero(word);
        if (rank == 0) {
          return static_cast<std::int64_t>(w * 64 + static_cast<std::size_t>(b));
        }
        --rank;
        word &= word - 1;
      }
    }
    throw std::logic_error("HypercubeState: selection ran past the bit array");
  }

  std::int64_t n_;
  std::int64_t weight_ = 0;
  Storage mode_;
  std::vector<std::uint64_t> bits_;  // dense
  IndexedSet ones_;                  // sparse
};

}  // namespace volatility::dynamics
