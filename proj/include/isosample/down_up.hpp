#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isosample/combinations.hpp"
#include "isosample/density.hpp"
#include "isosample/exact.hpp"
#include "isosample/log_space.hpp"
#include "isosample/random.hpp"
#include "isosample/subset.hpp"

namespace isosample {

// Default step constant c in ceil(c * k * ln(k / eps)).
inline constexpr double kDownUpStepConstant = 4.0;

inline std::size_t downup_default_steps(std::size_t k, double epsilon,
                                        double constant = kDownUpStepConstant) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) throw InputError("epsilon must lie in (0, 1/2]");
  if (k == 0) return 0;
  const double kd = static_cast<double>(k);
  return static_cast<std::size_t>(std::ceil(constant * kd * std::log(kd / epsilon)));
}

// Draws an index with probability proportional to exp(log_weights[i]).
template <RandomSource R>
std::size_t categorical_from_logs(std::span<const double> log_weights, R& rng) {
  double hi = kNegInf;
  for (double w : log_weights) hi = std::max(hi, w);
  if (hi == kNegInf) throw std::logic_error("categorical draw over an all-zero weight vector");
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - hi);
  double u = rng.uniform01() * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (log_weights[i] == kNegInf) continue;
    last_positive = i;
    u -= std::exp(log_weights[i] - hi);
    if (u < 0.0) return i;
  }
  return last_positive;
}

// The down-up walk P = D_{k->k-1} U_{k-1->k}: drop a uniform element e of the
// current set, then re-add some f outside the remainder (e included) with
// probability proportional to mu. Each step makes exactly n - k + 1 queries.
class DownUpChain {
 public:
  // Verifies mu(start) > 0 at the cost of one query.
  DownUpChain(const LogDensityOracle& oracle, SubsetState start) : oracle_(&oracle) {
    check_subset(start.elements(), oracle.n(), oracle.k());
    if (oracle.log_density(start) == kNegInf) {
      throw InputError("down-up chain must start inside the support");
    }
    current_.assign(start.begin(), start.end());
  }

  struct Unchecked {};
  // Skips the support check; the caller inspects restored_log_weight() after
  // the first step instead (the walk re-evaluates the current set for free).
  DownUpChain(const LogDensityOracle& oracle, std::span<const Element> start, Unchecked)
      : oracle_(&oracle), current_(start.begin(), start.end()) {
    check_subset(start, oracle.n(), oracle.k());
  }

  std::span<const Element> current() const { return current_; }
  SubsetState state() const { return SubsetState(current_); }
  std::uint64_t steps_taken() const { return steps_; }

  // log mu of the pre-step set, as evaluated by the last step (the candidate
  // that re-adds the dropped element).
  double restored_log_weight() const { return restored_log_weight_; }

  template <RandomSource R>
  void step(R& rng) {
    const std::size_t n = oracle_->n();
    const std::size_t k = current_.size();
    ++steps_;
    if (k == 0) return;
    const std::size_t drop = rng.uniform_index(k);
    const Element dropped = current_[drop];
    rest_.assign(current_.begin(), current_.end());
    rest_.erase(rest_.begin() + static_cast<std::ptrdiff_t>(drop));

    // candidates f in [n] \ rest, in increasing order
    candidates_.clear();
    log_weights_.clear();
    candidate_set_.resize(k);
    std::size_t r = 0;
    for (Element f = 0; f < n; ++f) {
      while (r < rest_.size() && rest_[r] < f) ++r;
      if (r < rest_.size() && rest_[r] == f) continue;
      // rest with f inserted at position r keeps the set sorted
      std::copy(rest_.begin(), rest_.begin() + static_cast<std::ptrdiff_t>(r), candidate_set_.begin());
      candidate_set_[r] = f;
      std::copy(rest_.begin() + static_cast<std::ptrdiff_t>(r), rest_.end(),
                candidate_set_.begin() + static_cast<std::ptrdiff_t>(r) + 1);
      candidates_.push_back(f);
      log_weights_.push_back(oracle_->log_density(candidate_set_));
      if (f == dropped) restored_log_weight_ = log_weights_.back();
    }
    if (restored_log_weight_ == kNegInf) return;
    const std::size_t pick = pick_candidate(rng);
    const Element f = candidates_[pick];
    auto pos = std::lower_bound(rest_.begin(), rest_.end(), f);
    rest_.insert(pos, f);
    current_.swap(rest_);
  }

 private:
  // categorical_from_logs with one exp per candidate
  template <RandomSource R>
  std::size_t pick_candidate(R& rng) {
    double hi = kNegInf;
    for (double w : log_weights_) hi = std::max(hi, w);
    double total = 0.0;
    for (double& w : log_weights_) total += (w = std::exp(w - hi));
    double u = rng.uniform01() * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < log_weights_.size(); ++i) {
      if (log_weights_[i] == 0.0) continue;
      last_positive = i;
      u -= log_weights_[i];
      if (u < 0.0) return i;
    }
    return last_positive;
  }

  const LogDensityOracle* oracle_;
  std::vector<Element> current_;
  std::vector<Element> rest_;
  std::vector<Element> candidate_set_;
  std::vector<Element> candidates_;
  std::vector<double> log_weights_;
  std::uint64_t steps_ = 0;
  double restored_log_weight_ = kNegInf;
};

// Runs the walk from `start` for ceil(4 k ln(k / eps)) steps (or `steps`).
template <RandomSource R>
SubsetState downup_sample(const LogDensityOracle& oracle, const SubsetState& start, double epsilon,
                          R& rng, std::optional<std::size_t> steps = std::nullopt) {
  const std::size_t count = steps ? *steps : downup_default_steps(oracle.k(), epsilon);
  DownUpChain chain(oracle, start);
  for (std::size_t i = 0; i < count; ++i) chain.step(rng);
  return chain.state();
}

// Dense transition kernel of the walk, indexed by colex rank. Rows of
// zero-density states are left as zero.
struct TransitionMatrix {
  std::size_t size = 0;
  std::vector<double> entries;  // row-major

  double operator()(std::size_t from, std::size_t to) const { return entries[from * size + to]; }
};

inline constexpr std::uint64_t kTransitionMatrixCap = 10'000;

inline TransitionMatrix transition_matrix(const LogDensityOracle& oracle) {
  const std::size_t n = oracle.n();
  const std::size_t k = oracle.k();
  if (enumeration_size(n, k) > kTransitionMatrixCap) {
    throw std::runtime_error("transition_matrix needs C(n, k) <= 10^4");
  }
  const ExactTable table = enumerate(oracle);
  const ColexIndexer& index = table.indexer();
  const std::size_t states = index.count();
  TransitionMatrix m{states, std::vector<double>(states * states, 0.0)};
  std::vector<Element> rest(k > 0 ? k - 1 : 0);
  std::vector<Element> next(k);
  std::vector<double> logs;
  std::vector<std::uint64_t> targets;
  std::uint64_t from = 0;
  for_each_subset(n, k, [&](std::span<const Element> s) {
    const std::uint64_t row = from++;
    if (table.log_weights()[row] == kNegInf) return;
    if (k == 0) {
      m.entries[row * states + row] = 1.0;
      return;
    }
    for (std::size_t drop = 0; drop < k; ++drop) {
      std::size_t w = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j != drop) rest[w++] = s[j];
      }
      logs.clear();
      targets.clear();
      for (Element f = 0; f < n; ++f) {
        if (std::binary_search(rest.begin(), rest.end(), f)) continue;
        std::copy(rest.begin(), rest.end(), next.begin());
        next[k - 1] = f;
        std::sort(next.begin(), next.end());
        const std::uint64_t col = index.rank(next);
        targets.push_back(col);
        logs.push_back(table.log_weights()[col]);
      }
      const double norm = log_sum_exp(logs);
      for (std::size_t c = 0; c < targets.size(); ++c) {
        m.entries[row * states + targets[c]] += std::exp(logs[c] - norm) / static_cast<double>(k);
      }
    }
  });
  return m;
}

// Worst deviations of a kernel from row-stochasticity (on the support),
// detailed balance and stationarity (L1 norm of mu P - mu).
struct KernelReport {
  double row_sum_error = 0.0;
  double detailed_balance_error = 0.0;
  double stationarity_error = 0.0;
};

inline KernelReport check_kernel(const ExactTable& table, const TransitionMatrix& m) {
  const std::span<const double> mu = table.probs();
  if (mu.size() != m.size) throw InputError("kernel size does not match the table");
  KernelReport r;
  std::vector<double> mu_p(m.size, 0.0);
  for (std::size_t i = 0; i < m.size; ++i) {
    if (mu[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < m.size; ++j) {
      row += m(i, j);
      mu_p[j] += mu[i] * m(i, j);
      r.detailed_balance_error =
          std::max(r.detailed_balance_error, std::abs(mu[i] * m(i, j) - mu[j] * m(j, i)));
    }
    r.row_sum_error = std::max(r.row_sum_error, std::abs(row - 1.0));
  }
  for (std::size_t j = 0; j < m.size; ++j) r.stationarity_error += std::abs(mu_p[j] - mu[j]);
  return r;
}

}  // namespace isosample
