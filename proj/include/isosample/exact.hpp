#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isosample/combinations.hpp"
#include "isosample/density.hpp"
#include "isosample/log_space.hpp"
#include "isosample/random.hpp"
#include "isosample/subset.hpp"

namespace isosample {

// A normalized distribution over l-subsets of [0, n), dense in colex order.
struct DistTable {
  std::size_t n = 0;
  std::size_t level = 0;
  std::vector<double> probs;

  DistTable() = default;
  DistTable(std::size_t n_, std::size_t level_)
      : n(n_), level(level_), probs(ColexIndexer(n_, level_).count(), 0.0) {}

  ColexIndexer indexer() const { return ColexIndexer(n, level); }

  double operator[](std::span<const Element> s) const { return probs[indexer().rank(s)]; }

  void normalize() {
    double total = 0.0;
    for (double p : probs) total += p;
    if (!(total > 0.0)) throw std::runtime_error("cannot normalize a zero distribution");
    for (double& p : probs) p /= total;
  }
};

inline DistTable point_mass(std::size_t n, std::span<const Element> s) {
  DistTable d(n, s.size());
  d.probs[d.indexer().rank(s)] = 1.0;
  return d;
}

// Full enumeration of a density: partition function, probabilities and
// marginals q_i = Pr[i in S].
class ExactTable {
 public:
  std::size_t n() const { return dist_.n; }
  std::size_t k() const { return dist_.level; }
  double log_partition() const { return log_partition_; }
  const DistTable& distribution() const { return dist_; }
  std::span<const double> probs() const { return dist_.probs; }
  std::span<const double> log_weights() const { return log_weights_; }
  std::span<const double> marginals() const { return marginals_; }
  const ColexIndexer& indexer() const { return indexer_; }

  double prob(std::span<const Element> s) const { return dist_.probs[indexer_.rank(s)]; }
  std::vector<Element> subset(std::uint64_t rank) const { return indexer_.unrank(rank); }

  // Inverse-CDF draw; returns the colex rank of the sampled subset.
  template <RandomSource R>
  std::uint64_t sample_rank(R& rng) const {
    const double u = rng.uniform01() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto r = static_cast<std::uint64_t>(it - cumulative_.begin());
    if (r >= cumulative_.size()) r = cumulative_.size() - 1;
    // zero-probability cells have zero width and cannot be hit except at a tie
    while (dist_.probs[r] == 0.0) --r;
    return r;
  }

  template <RandomSource R>
  SubsetState sample(R& rng) const {
    return SubsetState(subset(sample_rank(rng)));
  }

  friend ExactTable enumerate(const LogDensityOracle& oracle, std::uint64_t cap);
  friend ExactTable table_from_log_weights(std::size_t n, std::size_t k,
                                           std::vector<double> log_weights);

 private:
  ExactTable(std::size_t n, std::size_t k) : indexer_(n, k) {}

  void finish() {
    log_partition_ = log_sum_exp(log_weights_);
    if (log_partition_ == kNegInf) throw std::runtime_error("density has empty support");
    dist_.n = indexer_.n();
    dist_.level = indexer_.k();
    dist_.probs.resize(log_weights_.size());
    for (std::size_t r = 0; r < log_weights_.size(); ++r) {
      dist_.probs[r] = std::exp(log_weights_[r] - log_partition_);
    }
    dist_.normalize();
    cumulative_.resize(dist_.probs.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < dist_.probs.size(); ++r) cumulative_[r] = (acc += dist_.probs[r]);
    marginals_.assign(n(), 0.0);
    std::uint64_t r = 0;
    for_each_subset(n(), k(), [&](std::span<const Element> s) {
      const double p = dist_.probs[r++];
      if (p == 0.0) return;
      for (Element e : s) marginals_[e] += p;
    });
  }

  ColexIndexer indexer_;
  DistTable dist_;
  std::vector<double> log_weights_;
  std::vector<double> cumulative_;
  std::vector<double> marginals_;
  double log_partition_ = kNegInf;
};

inline std::uint64_t enumeration_size(std::size_t n, std::size_t k) {
  const double log_count = log_binomial(n, k);
  if (log_count > std::log(1e18)) return UINT64_MAX;
  return binomial(n, k);
}

// Brute-force table of an oracle; refuses when C(n, k) exceeds `cap`.
inline ExactTable enumerate(const LogDensityOracle& oracle,
                            std::uint64_t cap = kDefaultEnumerationCap) {
  const std::uint64_t total = enumeration_size(oracle.n(), oracle.k());
  if (total > cap) {
    throw std::runtime_error("enumeration of C(" + std::to_string(oracle.n()) + "," +
                             std::to_string(oracle.k()) + ") subsets needs cap >= " +
                             (total == UINT64_MAX ? std::string("1e18") : std::to_string(total)));
  }
  ExactTable table(oracle.n(), oracle.k());
  table.log_weights_.reserve(total);
  for_each_subset(oracle.n(), oracle.k(), [&](std::span<const Element> s) {
    table.log_weights_.push_back(oracle.log_density(s));
  });
  table.finish();
  return table;
}

// Table from log-weights already laid out in colex order.
inline ExactTable table_from_log_weights(std::size_t n, std::size_t k,
                                         std::vector<double> log_weights) {
  ExactTable table(n, k);
  if (log_weights.size() != table.indexer_.count()) {
    throw InputError("log-weight vector length does not match C(n, k)");
  }
  table.log_weights_ = std::move(log_weights);
  table.finish();
  return table;
}

// (nu D_{l -> m})(T) = sum_{S ⊇ T} nu(S) / C(l, m).
inline DistTable down_operator(const DistTable& nu, std::size_t target) {
  if (target > nu.level) {
    throw InputError("down operator target level exceeds source level");
  }
  DistTable out(nu.n, target);
  const ColexIndexer out_index = out.indexer();
  const double inv = 1.0 / static_cast<double>(binomial(nu.level, target));
  std::vector<Element> sub(target);
  std::uint64_t r = 0;
  for_each_subset(nu.n, nu.level, [&](std::span<const Element> s) {
    const double p = nu.probs[r++];
    if (p == 0.0) return;
    // all target-subsets of s, addressed by position
    for_each_subset(s.size(), target, [&](std::span<const Element> pos) {
      for (std::size_t j = 0; j < target; ++j) sub[j] = s[pos[j]];
      out.probs[out_index.rank(sub)] += p * inv;
    });
  });
  return out;
}

inline void check_same_space(const DistTable& a, const DistTable& b) {
  if (a.n != b.n || a.level != b.level) {
    throw InputError("distributions live on different levels");
  }
}

// D(nu | mu) = sum nu log(nu / mu); +inf when nu charges a mu-null set.
inline double kl_divergence(const DistTable& nu, const DistTable& mu) {
  check_same_space(nu, mu);
  double d = 0.0;
  for (std::size_t i = 0; i < nu.probs.size(); ++i) {
    const double a = nu.probs[i];
    if (a == 0.0) continue;
    const double b = mu.probs[i];
    if (b == 0.0) return kPosInf;
    d += a * std::log(a / b);
  }
  return std::max(d, 0.0);
}

inline double tv_distance(const DistTable& nu, const DistTable& mu) {
  check_same_space(nu, mu);
  double d = 0.0;
  for (std::size_t i = 0; i < nu.probs.size(); ++i) d += std::abs(nu.probs[i] - mu.probs[i]);
  return 0.5 * d;
}

// Histogram of sampled subsets (as colex ranks) against the exact table.
inline double empirical_tv(std::span<const std::uint64_t> sample_ranks, const ExactTable& table) {
  if (sample_ranks.empty()) throw InputError("empirical_tv needs at least one sample");
  std::vector<double> counts(table.probs().size(), 0.0);
  for (std::uint64_t r : sample_ranks) counts.at(r) += 1.0;
  const double inv = 1.0 / static_cast<double>(sample_ranks.size());
  double d = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) d += std::abs(counts[i] * inv - table.probs()[i]);
  return 0.5 * d;
}

inline double empirical_tv(std::span<const SubsetState> samples, const ExactTable& table) {
  std::vector<std::uint64_t> ranks;
  ranks.reserve(samples.size());
  for (const auto& s : samples) {
    check_subset(s.elements(), table.n(), table.k());
    ranks.push_back(table.indexer().rank(s.elements()));
  }
  return empirical_tv(ranks, table);
}

// Three-sigma multinomial noise scale of an empirical TV at `samples` draws:
// 3 * (1/2) * sum_i sqrt(p_i (1 - p_i) / N).
inline double tv_noise_3sigma(const ExactTable& table, std::size_t samples) {
  double acc = 0.0;
  for (double p : table.probs()) acc += std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return 1.5 * acc;
}

}  // namespace isosample
