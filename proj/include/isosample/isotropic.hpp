#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isosample/alias.hpp"
#include "isosample/density.hpp"
#include "isosample/down_up.hpp"
#include "isosample/exact.hpp"
#include "isosample/log_space.hpp"
#include "isosample/random.hpp"
#include "isosample/subset.hpp"

namespace isosample {

// Sizes of the hierarchical sampler: t i.i.d. draws per outer step, s inner
// down-up steps per outer step, l outer steps per sample.
struct IsotropicConfig {
  std::size_t t = 0;
  std::size_t s = 0;
  std::size_t l = 0;
  double epsilon = 0.0;

  // t = 20 k^2, s = ceil(3 k^2 ln(1/eps)), l = ceil(ln(2/eps)).
  static IsotropicConfig defaults(std::size_t k, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw InputError("epsilon must lie in (0, 1/2]");
    const double kd = static_cast<double>(k);
    IsotropicConfig c;
    c.epsilon = epsilon;
    c.t = 20 * k * k;
    c.s = static_cast<std::size_t>(std::ceil(3.0 * kd * kd * std::log(1.0 / epsilon)));
    c.l = static_cast<std::size_t>(std::ceil(std::log(2.0 / epsilon)));
    c.s = std::max<std::size_t>(c.s, 1);
    c.l = std::max<std::size_t>(c.l, 1);
    return c;
  }

  void validate(std::size_t k) const {
    if (t < k) throw InputError("isotropic config needs t >= k");
    if (s < 1) throw InputError("isotropic config needs s >= 1");
    if (l < 1) throw InputError("isotropic config needs l >= 1");
  }

  // Upper bound on induced-density evaluations per emitted sample.
  std::uint64_t queries_per_sample() const {
    return static_cast<std::uint64_t>(l) * s * (t + 1);
  }
};

// The incoming state interleaved with t i.i.d. draws.
struct ArrangedSequence {
  std::vector<Element> items;                // length t + k
  std::vector<Element> state_positions;      // sorted, k distinct positions
};

// Places the k state elements at a uniformly random k-subset of the t + k
// positions, in uniformly random order, and fills the rest with rho in stream
// order. Since rho is i.i.d. this has the law of a uniform permutation of all
// t + k items.
template <RandomSource R>
ArrangedSequence arrange(std::span<const Element> state, std::span<const Element> rho, R& rng) {
  const std::size_t k = state.size();
  const std::size_t total = k + rho.size();
  ArrangedSequence out;
  // Floyd's sampling of k positions out of total
  out.state_positions.reserve(k);
  for (std::size_t j = total - k; j < total; ++j) {
    const auto r = static_cast<Element>(rng.uniform_index(j + 1));
    if (std::find(out.state_positions.begin(), out.state_positions.end(), r) ==
        out.state_positions.end()) {
      out.state_positions.push_back(r);
    } else {
      out.state_positions.push_back(static_cast<Element>(j));
    }
  }
  std::sort(out.state_positions.begin(), out.state_positions.end());
  std::vector<Element> order(state.begin(), state.end());
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  out.items.resize(total);
  std::size_t next_state = 0;
  std::size_t next_rho = 0;
  for (std::size_t pos = 0; pos < total; ++pos) {
    if (next_state < k && out.state_positions[next_state] == pos) {
      out.items[pos] = order[next_state++];
    } else {
      out.items[pos] = rho[next_rho++];
    }
  }
  return out;
}

// mu_{sigma,p}(S) ∝ mu(sigma_S) prod_{i in S} p(sigma_i)^{-1} over index
// k-subsets of [0, t + k); zero when two chosen indices carry the same ground
// element. The normalizer is never computed here.
//
// Holds references: the base oracle and p must outlive this object.
class InducedDensity final : public LogDensityOracle {
 public:
  InducedDensity(const LogDensityOracle& base, const SamplingDistribution& p,
                 ArrangedSequence sigma)
      : LogDensityOracle(sigma.items.size(), base.k()), base_(base), sigma_(std::move(sigma)) {
    log_p_.resize(sigma_.items.size());
    for (std::size_t i = 0; i < sigma_.items.size(); ++i) {
      const Element e = sigma_.items[i];
      if (e >= base.n()) throw InputError("arranged sequence element outside ground set");
      log_p_[i] = std::log(p.p(e));
    }
  }

  const ArrangedSequence& sigma() const { return sigma_; }

  // Ground-set image of an index set, sorted (may contain repeats).
  SmallElements image(std::span<const Element> idx) const {
    SmallElements out(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) out[j] = sigma_.items[idx[j]];
    std::sort(out.begin(), out.end());
    return out;
  }

  std::uint64_t collisions() const { return collisions_; }

 protected:
  double evaluate(std::span<const Element> idx) const override {
    const SmallElements mapped = image(idx);
    if (std::adjacent_find(mapped.begin(), mapped.end()) != mapped.end()) {
      ++collisions_;
      return kNegInf;
    }
    const double base = base_.log_density(std::span<const Element>(mapped.data(), mapped.size()));
    if (base == kNegInf) return kNegInf;
    double correction = 0.0;
    for (Element i : idx) correction += log_p_[i];
    return base - correction;
  }

 private:
  const LogDensityOracle& base_;
  ArrangedSequence sigma_;
  std::vector<double> log_p_;
  mutable std::uint64_t collisions_ = 0;
};

// The accelerated chain realized hierarchically: each outer step draws t
// elements from p, interleaves the current state, and runs s down-up steps on
// the induced density starting from the state's own positions.
//
// A sampler instance is single-threaded (it keeps counters); run independent
// instances for parallel chains.
class IsotropicSampler {
 public:
  IsotropicSampler(const LogDensityOracle& base, const SamplingDistribution& p,
                   IsotropicConfig config)
      : base_(base), p_(p), config_(config) {
    config_.validate(base.k());
    if (p.size() != base.n()) throw InputError("sampling distribution size must equal n");
    if (!p.strictly_positive()) {
      throw InputError("isotropic sampling needs p(i) > 0 for every element");
    }
  }

  const IsotropicConfig& config() const { return config_; }

  // Evaluations of induced densities (each is at most one base query; index
  // sets with colliding images are answered zero without a base query).
  std::uint64_t induced_queries() const { return induced_queries_; }
  std::uint64_t collisions() const { return collisions_; }
  std::uint64_t outer_steps() const { return outer_steps_; }

  template <RandomSource R>
  SubsetState outer_step(const SubsetState& state, R& rng) {
    check_subset(state.elements(), base_.n(), base_.k());
    const std::vector<Element> rho = p_.draw_sequence(config_.t, rng);
    InducedDensity induced(base_, p_, arrange(state.elements(), rho, rng));
    DownUpChain inner(induced, induced.sigma().state_positions, DownUpChain::Unchecked{});
    for (std::size_t i = 0; i < config_.s; ++i) {
      inner.step(rng);
      if (i == 0 && inner.restored_log_weight() == kNegInf) {
        induced_queries_ += induced.queries();
        throw InputError("isotropic outer step must start inside the support");
      }
    }
    induced_queries_ += induced.queries();
    collisions_ += induced.collisions();
    ++outer_steps_;
    const SmallElements out = induced.image(inner.current());
    return SubsetState(std::vector<Element>(out.begin(), out.end()));
  }

  template <RandomSource R>
  SubsetState sample(const SubsetState& start, R& rng) {
    SubsetState state = start;
    for (std::size_t i = 0; i < config_.l; ++i) state = outer_step(state, rng);
    return state;
  }

 private:
  const LogDensityOracle& base_;
  const SamplingDistribution& p_;
  IsotropicConfig config_;
  std::uint64_t induced_queries_ = 0;
  std::uint64_t collisions_ = 0;
  std::uint64_t outer_steps_ = 0;
};

template <RandomSource R>
SubsetState outer_step(const SubsetState& state, const LogDensityOracle& oracle,
                       const SamplingDistribution& p, const IsotropicConfig& config, R& rng) {
  IsotropicSampler sampler(oracle, p, config);
  return sampler.outer_step(state, rng);
}

template <RandomSource R>
SubsetState isotropic_sample(const LogDensityOracle& oracle, const SamplingDistribution& p,
                             const SubsetState& start, double epsilon, R& rng,
                             std::optional<IsotropicConfig> config = std::nullopt) {
  IsotropicSampler sampler(oracle, p, config ? *config : IsotropicConfig::defaults(oracle.k(), epsilon));
  return sampler.sample(start, rng);
}

// Runs `trials` outer steps from exact draws S ~ mu, with the inner walk
// replaced by exact sampling from the enumerated induced density, and returns
// the empirical TV of the outputs against mu. Stationarity predicts zero for
// every t >= 1 and every strictly positive p.
template <RandomSource R>
double exact_outer_kernel_tv(const LogDensityOracle& oracle, const SamplingDistribution& p,
                             std::size_t t, std::size_t trials, R& rng) {
  if (t < 1) throw InputError("exact outer kernel needs t >= 1");
  if (!p.strictly_positive() || p.size() != oracle.n()) {
    throw InputError("exact outer kernel needs a strictly positive p over the ground set");
  }
  const ExactTable table = enumerate(oracle);
  std::vector<std::uint64_t> ranks;
  ranks.reserve(trials);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const SubsetState start = table.sample(rng);
    const std::vector<Element> rho = p.draw_sequence(t, rng);
    const InducedDensity induced(oracle, p, arrange(start.elements(), rho, rng));
    const ExactTable inner = enumerate(induced);
    const std::vector<Element> idx = inner.subset(inner.sample_rank(rng));
    const SmallElements image = induced.image(idx);
    ranks.push_back(table.indexer().rank(std::span<const Element>(image.data(), image.size())));
  }
  return empirical_tv(ranks, table);
}

inline constexpr std::uint64_t kOuterKernelCap = 50'000'000;

// Exact transition kernel of one outer step with the inner walk replaced by
// exact sampling from the induced density: averages over every rho in [n]^t,
// every placement of the state and every ordering of it. Indexed by colex
// rank; rows of zero-density states are zero.
inline TransitionMatrix exact_outer_kernel(const LogDensityOracle& oracle,
                                           const SamplingDistribution& p, std::size_t t) {
  const std::size_t n = oracle.n();
  const std::size_t k = oracle.k();
  if (p.size() != n || !p.strictly_positive()) {
    throw InputError("exact outer kernel needs a strictly positive p over the ground set");
  }
  const ExactTable table = enumerate(oracle, kTransitionMatrixCap);
  const ColexIndexer& index = table.indexer();
  const std::uint64_t states = index.count();
  const std::uint64_t positions = binomial(t + k, k);
  std::uint64_t orders = 1;
  for (std::size_t i = 2; i <= k; ++i) orders *= i;
  const double rho_count = std::pow(static_cast<double>(n), static_cast<double>(t));
  if (rho_count * static_cast<double>(states * positions * orders * positions) >
      static_cast<double>(kOuterKernelCap)) {
    throw std::runtime_error("exact outer kernel is too large to enumerate");
  }
  TransitionMatrix m{states, std::vector<double>(states * states, 0.0)};
  const double placement_weight = 1.0 / static_cast<double>(positions * orders);
  std::vector<Element> rho(t, 0);
  std::vector<Element> order(k);
  std::vector<Element> items(t + k);
  std::vector<double> logs;
  std::vector<std::uint64_t> targets;
  SmallElements image;
  for (std::uint64_t row = 0; row < states; ++row) {
    if (table.log_weights()[row] == kNegInf) continue;
    const std::vector<Element> state = index.unrank(row);
    std::fill(rho.begin(), rho.end(), 0);
    while (true) {
      double rho_prob = 1.0;
      for (Element e : rho) rho_prob *= p.p(e);
      for_each_subset(t + k, k, [&](std::span<const Element> pos) {
        order = state;
        do {
          std::size_t next_state = 0;
          std::size_t next_rho = 0;
          for (std::size_t i = 0; i < t + k; ++i) {
            items[i] = (next_state < k && pos[next_state] == i) ? order[next_state++] : rho[next_rho++];
          }
          logs.clear();
          targets.clear();
          for_each_subset(t + k, k, [&](std::span<const Element> idx) {
            image.assign(idx.size(), 0);
            double correction = 0.0;
            for (std::size_t j = 0; j < idx.size(); ++j) {
              image[j] = items[idx[j]];
              correction += std::log(p.p(image[j]));
            }
            std::sort(image.begin(), image.end());
            if (std::adjacent_find(image.begin(), image.end()) != image.end()) return;
            const std::uint64_t col = index.rank(std::span<const Element>(image.data(), image.size()));
            const double lw = table.log_weights()[col];
            if (lw == kNegInf) return;
            logs.push_back(lw - correction);
            targets.push_back(col);
          });
          const double norm = log_sum_exp(logs);
          for (std::size_t c = 0; c < targets.size(); ++c) {
            m.entries[row * states + targets[c]] +=
                rho_prob * placement_weight * std::exp(logs[c] - norm);
          }
        } while (std::next_permutation(order.begin(), order.end()));
      });
      // next rho in [n]^t, odometer order
      std::size_t j = 0;
      while (j < t && ++rho[j] == n) rho[j++] = 0;
      if (j == t) break;
    }
  }
  return m;
}

}  // namespace isosample
