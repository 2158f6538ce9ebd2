#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isosample/random.hpp"
#include "isosample/subset.hpp"

namespace isosample {

// A probability vector over [0, n) with Walker/Vose alias tables for O(1)
// draws. Immutable after build; share freely across chains.
class SamplingDistribution {
 public:
  // Normalizes `weights`. With `floor`, the result is mixed with uniform just
  // enough that every p(i) >= floor (floor must not exceed 1/n).
  static SamplingDistribution build(std::span<const double> weights,
                                    std::optional<double> floor = std::nullopt) {
    if (weights.empty()) throw InputError("sampling distribution needs at least one weight");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw InputError("sampling weights must be finite and nonnegative");
      }
      total += w;
    }
    if (!(total > 0.0)) throw InputError("sampling weights are all zero");
    const auto n = static_cast<double>(weights.size());
    SamplingDistribution d;
    d.p_.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) d.p_[i] = weights[i] / total;
    if (floor) {
      if (!(*floor >= 0.0) || *floor > 1.0 / n * (1.0 + 1e-12)) {
        throw InputError("probability floor must lie in [0, 1/n]");
      }
      const double lowest = *std::min_element(d.p_.begin(), d.p_.end());
      if (lowest < *floor) {
        // (1 - beta) lowest + beta / n = floor
        const double beta = (*floor - lowest) / (1.0 / n - lowest);
        for (double& p : d.p_) p = (1.0 - beta) * p + beta / n;
      }
    }
    double sum = 0.0;
    for (double p : d.p_) sum += p;
    for (double& p : d.p_) p /= sum;
    d.build_tables();
    return d;
  }

  static SamplingDistribution uniform(std::size_t n) {
    std::vector<double> w(n, 1.0);
    return build(w);
  }

  std::size_t size() const { return p_.size(); }
  double p(std::size_t i) const { return p_[i]; }
  std::span<const double> probabilities() const { return p_; }

  bool strictly_positive() const {
    return std::all_of(p_.begin(), p_.end(), [](double v) { return v > 0.0; });
  }

  template <RandomSource R>
  Element draw(R& rng) const {
    const std::uint64_t cell = rng.uniform_index(p_.size());
    return rng.uniform01() < accept_[cell] ? static_cast<Element>(cell) : alias_[cell];
  }

  template <RandomSource R>
  std::vector<Element> draw_sequence(std::size_t t, R& rng) const {
    std::vector<Element> out(t);
    for (auto& e : out) e = draw(rng);
    return out;
  }

  // The distribution the alias tables actually encode:
  // sum over cells of (1/n) * accept to the cell and (1/n) * (1 - accept) to its alias.
  std::vector<double> implied_probabilities() const {
    const double inv = 1.0 / static_cast<double>(p_.size());
    std::vector<double> q(p_.size(), 0.0);
    for (std::size_t c = 0; c < p_.size(); ++c) {
      q[c] += inv * accept_[c];
      q[alias_[c]] += inv * (1.0 - accept_[c]);
    }
    return q;
  }

 private:
  void build_tables() {
    const std::size_t n = p_.size();
    accept_.assign(n, 1.0);
    alias_.resize(n);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      alias_[i] = static_cast<Element>(i);
      scaled[i] = p_[i] * static_cast<double>(n);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      accept_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // leftovers are 1 up to rounding
    for (std::uint32_t i : small) accept_[i] = 1.0;
    for (std::uint32_t i : large) accept_[i] = 1.0;
  }

  std::vector<double> p_;
  std::vector<double> accept_;
  std::vector<Element> alias_;
};

}  // namespace isosample
