#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "isosample/log_space.hpp"
#include "isosample/subset.hpp"

namespace isosample {

// Colexicographic ranking of k-subsets of [0, n):
//   rank(s_0 < s_1 < ... < s_{k-1}) = sum_j C(s_j, j + 1).
class ColexIndexer {
 public:
  ColexIndexer(std::size_t n, std::size_t k) : n_(n), k_(k), table_((k + 1) * (n + 1), 0) {
    for (std::size_t j = 0; j <= k; ++j) {
      for (std::size_t s = 0; s <= n; ++s) table_[j * (n + 1) + s] = binomial(s, j);
    }
  }

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::uint64_t count() const { return choose(n_, k_); }

  std::uint64_t choose(std::size_t s, std::size_t j) const { return table_[j * (n_ + 1) + s]; }

  std::uint64_t rank(std::span<const Element> sorted) const {
    std::uint64_t r = 0;
    for (std::size_t j = 0; j < sorted.size(); ++j) r += choose(sorted[j], j + 1);
    return r;
  }

  void unrank(std::uint64_t r, std::span<Element> out) const {
    std::size_t s = n_;
    for (std::size_t j = k_; j-- > 0;) {
      // largest s with C(s, j + 1) <= r
      while (choose(s, j + 1) > r) --s;
      out[j] = static_cast<Element>(s);
      r -= choose(s, j + 1);
    }
  }

  std::vector<Element> unrank(std::uint64_t r) const {
    std::vector<Element> out(k_);
    unrank(r, out);
    return out;
  }

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<std::uint64_t> table_;
};

// Advances s to its colex successor. Returns false after the last subset.
inline bool next_colex(std::span<Element> s, std::size_t n) {
  const std::size_t k = s.size();
  for (std::size_t j = 0; j < k; ++j) {
    const Element limit = (j + 1 < k) ? s[j + 1] : static_cast<Element>(n);
    if (s[j] + 1 < limit) {
      ++s[j];
      for (std::size_t i = 0; i < j; ++i) s[i] = static_cast<Element>(i);
      return true;
    }
  }
  return false;
}

// Calls f(std::span<const Element>) for every k-subset of [0, n) in colex
// order, so the i-th call sees the subset of rank i.
template <typename F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return;
  std::vector<Element> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = static_cast<Element>(i);
  do {
    f(std::span<const Element>(s));
  } while (next_colex(s, n));
}

}  // namespace isosample
