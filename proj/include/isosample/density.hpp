#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "isosample/combinations.hpp"
#include "isosample/graph.hpp"
#include "isosample/linear_algebra.hpp"
#include "isosample/log_space.hpp"
#include "isosample/subset.hpp"

namespace isosample {

// Largest C(n, k) any brute-force routine will enumerate unless told otherwise.
inline constexpr std::uint64_t kDefaultEnumerationCap = 2'000'000;

using SmallElements = boost::container::small_vector<Element, 16>;

// Lexicographic order usable across vector/span so lookups need no copy.
struct RangeLess {
  using is_transparent = void;
  template <typename A, typename B>
  bool operator()(const A& a, const B& b) const {
    return std::lexicographical_compare(std::begin(a), std::end(a), std::begin(b), std::end(b));
  }
};

using WeightTable = std::map<std::vector<Element>, double, RangeLess>;

// A density mu over k-subsets of [0, n), visible only through log mu(S).
//
// Every algorithm in the library sees a density exclusively through
// log_density(), which validates the subset, bumps the query counter, and
// forwards to the family's evaluate(). The counter is the artifact's unit of
// cost: "queries" everywhere means calls counted here.
class LogDensityOracle {
 public:
  LogDensityOracle(std::size_t n, std::size_t k) : n_(n), k_(k) {
    if (k > n) {
      throw InputError("degree k=" + std::to_string(k) + " exceeds ground set size n=" +
                       std::to_string(n));
    }
  }
  LogDensityOracle(const LogDensityOracle&) = delete;
  LogDensityOracle& operator=(const LogDensityOracle&) = delete;
  virtual ~LogDensityOracle() = default;

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }

  // log mu(S) for a sorted k-subset; -inf encodes mu(S) = 0.
  double log_density(std::span<const Element> s) const {
    check_subset(s, n_, k_);
    queries_.fetch_add(1, std::memory_order_relaxed);
    return evaluate(s);
  }
  double log_density(const SubsetState& s) const { return log_density(s.elements()); }

  std::uint64_t queries() const { return queries_.load(std::memory_order_relaxed); }
  void reset_queries() const { queries_.store(0, std::memory_order_relaxed); }

  // Some S with mu(S) > 0. The default scans C(n, k) in colex order (up to the
  // enumeration cap); families override with something structural.
  virtual SubsetState support_point() const {
    const std::uint64_t total = ColexIndexer(n_, k_).count();
    if (total > kDefaultEnumerationCap) {
      throw std::runtime_error("support_point: exhaustive search needs " + std::to_string(total) +
                               " subsets, above the enumeration cap");
    }
    std::optional<SubsetState> found;
    for_each_subset(n_, k_, [&](std::span<const Element> s) {
      if (!found && log_density(s) > kNegInf) found = SubsetState({s.begin(), s.end()});
    });
    if (!found) throw std::runtime_error("support_point: density has empty support");
    return *found;
  }

 protected:
  // s is a validated, strictly increasing k-subset.
  virtual double evaluate(std::span<const Element> s) const = 0;

 private:
  std::size_t n_;
  std::size_t k_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

// Uniform density over all k-subsets (the uniform matroid U(n, k)).
class UniformDensity final : public LogDensityOracle {
 public:
  UniformDensity(std::size_t n, std::size_t k) : LogDensityOracle(n, k) {}

  SubsetState support_point() const override {
    std::vector<Element> s(k());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<Element>(i);
    return SubsetState(std::move(s));
  }

 protected:
  double evaluate(std::span<const Element>) const override { return 0.0; }
};

// A density given as a table of (subset, weight) pairs; absent subsets weigh 0.
class ExplicitDensity final : public LogDensityOracle {
 public:
  ExplicitDensity(std::size_t n, std::size_t k,
                  const std::vector<std::pair<SubsetState, double>>& entries)
      : LogDensityOracle(n, k) {
    bool any_positive = false;
    for (const auto& [s, w] : entries) {
      check_subset(s.elements(), n, k);
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw InputError("explicit density weights must be finite and nonnegative");
      }
      if (w == 0.0) continue;
      any_positive = true;
      auto [it, inserted] = table_.emplace(std::vector<Element>(s.begin(), s.end()), std::log(w));
      if (!inserted) it->second = log_add(it->second, std::log(w));
    }
    if (!any_positive) throw InputError("explicit density needs at least one positive weight");
  }

  // Takes log-weights directly (used by subdivision, where weights can be tiny).
  static std::unique_ptr<ExplicitDensity> from_log_weights(
      std::size_t n, std::size_t k, const WeightTable& table) {
    std::unique_ptr<ExplicitDensity> d(new ExplicitDensity(n, k));
    for (const auto& [s, lw] : table) {
      check_subset(s, n, k);
      if (lw > kNegInf) d->table_.emplace(s, lw);
    }
    if (d->table_.empty()) throw InputError("explicit density needs at least one positive weight");
    return d;
  }

  const WeightTable& log_weights() const { return table_; }

  SubsetState support_point() const override {
    return SubsetState(std::vector<Element>(table_.begin()->first));
  }

 protected:
  double evaluate(std::span<const Element> s) const override {
    auto it = table_.find(s);
    return it == table_.end() ? kNegInf : it->second;
  }

 private:
  ExplicitDensity(std::size_t n, std::size_t k) : LogDensityOracle(n, k) {}

  WeightTable table_;
};

// Indicator of acyclic k-edge sets (size-k forests) of a graph; the ground set
// is the edge list.
class ForestDensity final : public LogDensityOracle {
 public:
  ForestDensity(Graph graph, std::size_t k)
      : LogDensityOracle(graph.edges.size(), k), graph_(std::move(graph)) {
    for (auto [a, b] : graph_.edges) {
      if (a >= graph_.num_vertices || b >= graph_.num_vertices) {
        throw InputError("edge endpoint outside vertex range");
      }
    }
  }

  const Graph& graph() const { return graph_; }

  bool is_forest(std::span<const Element> edges) const {
    if (edges.size() <= kSmallForest) return is_small_forest(edges);
    // Local map from touched vertices to compact ids keeps this O(k) in space.
    boost::container::small_vector<std::uint32_t, 32> verts;
    for (Element e : edges) {
      verts.push_back(graph_.edges[e].first);
      verts.push_back(graph_.edges[e].second);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    boost::container::small_vector<std::uint32_t, 32> parent(verts.size());
    for (std::uint32_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto id = [&](std::uint32_t v) {
      return static_cast<std::uint32_t>(std::lower_bound(verts.begin(), verts.end(), v) -
                                        verts.begin());
    };
    auto find = [&](std::uint32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (Element e : edges) {
      const std::uint32_t a = find(id(graph_.edges[e].first));
      const std::uint32_t b = find(id(graph_.edges[e].second));
      if (a == b) return false;
      parent[a] = b;
    }
    return true;
  }

  // Greedy: scan edges in order, keep those that do not close a cycle.
  SubsetState support_point() const override {
    DisjointSets sets(graph_.num_vertices);
    std::vector<Element> chosen;
    for (Element e = 0; e < graph_.edges.size() && chosen.size() < k(); ++e) {
      if (sets.unite(graph_.edges[e].first, graph_.edges[e].second)) chosen.push_back(e);
    }
    if (chosen.size() < k()) {
      throw std::runtime_error("graph has no forest with " + std::to_string(k()) + " edges");
    }
    return SubsetState(std::move(chosen));
  }

 protected:
  double evaluate(std::span<const Element> s) const override {
    return is_forest(s) ? 0.0 : kNegInf;
  }

 private:
  static constexpr std::size_t kSmallForest = 16;

  // Same test with vertex ids assigned by linear search in fixed arrays.
  bool is_small_forest(std::span<const Element> edges) const {
    std::array<std::uint32_t, 2 * kSmallForest> verts;
    std::array<std::uint32_t, 2 * kSmallForest> parent;
    std::uint32_t used = 0;
    auto id = [&](std::uint32_t v) {
      for (std::uint32_t i = 0; i < used; ++i) {
        if (verts[i] == v) return i;
      }
      verts[used] = v;
      parent[used] = used;
      return used++;
    };
    auto find = [&](std::uint32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (Element e : edges) {
      const std::uint32_t a = find(id(graph_.edges[e].first));
      const std::uint32_t b = find(id(graph_.edges[e].second));
      if (a == b) return false;
      parent[a] = b;
    }
    return true;
  }

  Graph graph_;
};

// Indicator of linearly independent k-column sets of an r x n matrix.
class LinearMatroidDensity final : public LogDensityOracle {
 public:
  enum class Arithmetic { kFloating, kExactRational };

  LinearMatroidDensity(DenseMatrix<double> matrix, std::size_t k,
                       Arithmetic arithmetic = Arithmetic::kFloating)
      : LogDensityOracle(matrix.cols, k), matrix_(std::move(matrix)), arithmetic_(arithmetic) {
    if (k > matrix_.rows) {
      throw InputError("k exceeds the number of matrix rows; no k columns can be independent");
    }
    if (arithmetic_ == Arithmetic::kExactRational) {
      exact_ = DenseMatrix<Rational>(matrix_.rows, matrix_.cols);
      // doubles are dyadic rationals, so this conversion is exact
      for (std::size_t i = 0; i < matrix_.data.size(); ++i) exact_.data[i] = Rational(matrix_.data[i]);
    }
  }

  std::size_t rank_of(std::span<const Element> columns) const {
    if (arithmetic_ == Arithmetic::kExactRational) return rank_impl(exact_, columns);
    return rank_impl(matrix_, columns);
  }

  SubsetState support_point() const override {
    std::vector<Element> chosen;
    for (Element c = 0; c < n() && chosen.size() < k(); ++c) {
      chosen.push_back(c);
      if (rank_of(chosen) < chosen.size()) chosen.pop_back();
    }
    if (chosen.size() < k()) {
      throw std::runtime_error("matrix has rank below " + std::to_string(k()));
    }
    return SubsetState(std::move(chosen));
  }

 protected:
  double evaluate(std::span<const Element> s) const override {
    return rank_of(s) == s.size() ? 0.0 : kNegInf;
  }

 private:
  template <typename T>
  static std::size_t rank_impl(const DenseMatrix<T>& full, std::span<const Element> columns) {
    DenseMatrix<T> sub(full.rows, columns.size());
    for (std::size_t i = 0; i < full.rows; ++i) {
      for (std::size_t j = 0; j < columns.size(); ++j) sub(i, j) = full(i, columns[j]);
    }
    return eliminate_rank(sub);
  }

  DenseMatrix<double> matrix_;
  DenseMatrix<Rational> exact_;
  Arithmetic arithmetic_;
};

// L-ensemble k-DPP: mu(S) = det(L_S) for a symmetric PSD kernel L.
class DppDensity final : public LogDensityOracle {
 public:
  DppDensity(DenseMatrix<double> kernel, std::size_t k)
      : LogDensityOracle(kernel.rows, k), kernel_(std::move(kernel)) {
    if (kernel_.rows != kernel_.cols) throw InputError("DPP kernel must be square");
    for (std::size_t i = 0; i < kernel_.rows; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double a = kernel_(i, j);
        const double b = kernel_(j, i);
        if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
          throw InputError("DPP kernel must be symmetric");
        }
      }
    }
  }

  const DenseMatrix<double>& kernel() const { return kernel_; }

  double log_det(std::span<const Element> s) const {
    std::vector<double> work;
    return log_det_principal(kernel_.data, kernel_.rows, s, work);
  }

  // Greedy volume maximization; falls back to exhaustive search if the greedy
  // set is degenerate.
  SubsetState support_point() const override {
    std::vector<Element> chosen;
    std::vector<Element> trial;
    for (std::size_t step = 0; step < k(); ++step) {
      double best = kNegInf;
      Element best_e = 0;
      for (Element e = 0; e < n(); ++e) {
        if (std::find(chosen.begin(), chosen.end(), e) != chosen.end()) continue;
        trial = chosen;
        trial.push_back(e);
        std::sort(trial.begin(), trial.end());
        const double v = log_det(trial);
        if (v > best) {
          best = v;
          best_e = e;
        }
      }
      if (best == kNegInf) return LogDensityOracle::support_point();
      chosen.push_back(best_e);
    }
    return SubsetState(std::move(chosen));
  }

 protected:
  double evaluate(std::span<const Element> s) const override { return log_det(s); }

 private:
  DenseMatrix<double> kernel_;
};

// mu_lambda(S) = lambda^{|S ∩ U|} mu(S). Queries are forwarded to (and counted
// by) the base oracle as well as this one.
class TiltedDensity final : public LogDensityOracle {
 public:
  TiltedDensity(std::shared_ptr<const LogDensityOracle> base, SubsetState anchor, double log_lambda)
      : LogDensityOracle(base->n(), base->k()),
        base_(std::move(base)),
        anchor_(std::move(anchor)),
        log_lambda_(log_lambda) {
    for (Element e : anchor_) {
      if (e >= n()) throw InputError("tilt anchor element outside ground set");
    }
    if (!std::isfinite(log_lambda_)) throw InputError("tilt log_lambda must be finite");
  }

  const LogDensityOracle& base() const { return *base_; }
  const SubsetState& anchor() const { return anchor_; }
  double log_lambda() const { return log_lambda_; }

  std::size_t overlap(std::span<const Element> s) const {
    return intersection_size(s, anchor_.elements());
  }

  SubsetState support_point() const override { return base_->support_point(); }

 protected:
  double evaluate(std::span<const Element> s) const override {
    const double base = base_->log_density(s);
    if (base == kNegInf) return kNegInf;
    return base + static_cast<double>(overlap(s)) * log_lambda_;
  }

 private:
  std::shared_ptr<const LogDensityOracle> base_;
  SubsetState anchor_;
  double log_lambda_;
};

}  // namespace isosample
