#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "isosample/combinations.hpp"
#include "isosample/density.hpp"
#include "isosample/exact.hpp"
#include "isosample/log_space.hpp"

namespace isosample {

// Outcome of checking one inequality family lhs <= rhs over many instances.
// Violations are relative: max(0, lhs - rhs) / rhs (infinite if rhs = 0 < lhs).
// Checks report the worst case rather than stopping at the first failure.
struct InequalityReport {
  std::string check;
  std::size_t instances = 0;
  double max_violation = 0.0;
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;

  void record(double lhs, double rhs) {
    double v = 0.0;
    if (lhs > rhs) v = rhs > 0.0 ? (lhs - rhs) / rhs : kPosInf;
    if (instances++ == 0 || v > max_violation) {
      max_violation = v;
      worst_lhs = lhs;
      worst_rhs = rhs;
    }
  }

  void merge(const InequalityReport& other) {
    instances += other.instances;
    if (other.max_violation > max_violation) {
      max_violation = other.max_violation;
      worst_lhs = other.worst_lhs;
      worst_rhs = other.worst_rhs;
    }
  }

  bool holds(double tolerance = 1e-9) const { return max_violation <= tolerance; }
};

// alpha(k, l) = C(k, l) (l / k)^l.
inline double alpha_factor(std::size_t k, std::size_t l) {
  if (l > k) throw InputError("alpha(k, l) needs l <= k");
  if (l == 0) return 1.0;
  return static_cast<double>(binomial(k, l)) *
         std::pow(static_cast<double>(l) / static_cast<double>(k), static_cast<double>(l));
}

inline double marginal_product(const ExactTable& table, std::span<const Element> t) {
  double prod = 1.0;
  for (Element e : t) prod *= table.marginals()[e];
  return prod;
}

// mu(T) <= prod_{i in T} q_i for every T in the support.
inline InequalityReport verify_point_negcorr(const ExactTable& table) {
  InequalityReport report{"point_negcorr"};
  std::uint64_t r = 0;
  for_each_subset(table.n(), table.k(), [&](std::span<const Element> t) {
    const double p = table.probs()[r++];
    if (p > 0.0) report.record(p, marginal_product(table, t));
  });
  return report;
}

// Pr[T ⊆ S] <= alpha(k, l) prod_{i in T} q_i for every l-subset T.
// Also fails (infinite violation) if alpha(k, 2) > 2 or alpha(k, l) > e^l.
inline InequalityReport verify_alpha_bound(const ExactTable& table, std::size_t l) {
  const std::size_t k = table.k();
  InequalityReport report{"alpha_bound"};
  const double alpha = alpha_factor(k, l);
  if (alpha > std::exp(static_cast<double>(l)) * (1 + 1e-12) ||
      (k >= 2 && alpha_factor(k, 2) > 2.0 * (1 + 1e-12))) {
    report.record(kPosInf, 0.0);
  }
  // Pr[T ⊆ S] = C(k, l) * (mu D_{k->l})(T)
  const DistTable down = down_operator(table.distribution(), l);
  const double scale = static_cast<double>(binomial(k, l));
  std::uint64_t r = 0;
  for_each_subset(table.n(), l, [&](std::span<const Element> t) {
    report.record(scale * down.probs[r++], alpha * marginal_product(table, t));
  });
  return report;
}

// Right-hand side (sum_{i in T} q_i / k)^k of the subset bound.
inline double subset_bound_rhs(const ExactTable& table, std::span<const Element> t) {
  double sum = 0.0;
  for (Element e : t) sum += table.marginals()[e];
  return std::pow(sum / static_cast<double>(table.k()), static_cast<double>(table.k()));
}

// Pr[S ⊆ T] <= (sum_{i in T} q_i / k)^k for one set T (any size, any order).
inline InequalityReport verify_subset_bound(const ExactTable& table,
                                            std::span<const Element> t) {
  std::vector<char> in_t(table.n(), 0);
  for (Element e : t) in_t.at(e) = 1;
  double lhs = 0.0;
  std::uint64_t r = 0;
  for_each_subset(table.n(), table.k(), [&](std::span<const Element> s) {
    const double p = table.probs()[r++];
    if (p == 0.0) return;
    if (std::all_of(s.begin(), s.end(), [&](Element e) { return in_t[e] != 0; })) lhs += p;
  });
  std::vector<Element> distinct;
  for (Element e = 0; e < table.n(); ++e) {
    if (in_t[e]) distinct.push_back(e);
  }
  InequalityReport report{"subset_bound"};
  report.record(lhs, subset_bound_rhs(table, distinct));
  return report;
}

// The subset bound for all 2^n sets T, using a subset-sum (zeta) transform.
// Limited to n <= 26.
inline InequalityReport verify_subset_bound_all(const ExactTable& table) {
  const std::size_t n = table.n();
  if (n > 26) throw InputError("verify_subset_bound_all supports n <= 26");
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> within(full, 0.0);
  std::uint64_t r = 0;
  for_each_subset(n, table.k(), [&](std::span<const Element> s) {
    std::size_t mask = 0;
    for (Element e : s) mask |= std::size_t{1} << e;
    within[mask] += table.probs()[r++];
  });
  for (std::size_t bit = 0; bit < n; ++bit) {
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (mask & (std::size_t{1} << bit)) within[mask] += within[mask ^ (std::size_t{1} << bit)];
    }
  }
  InequalityReport report{"subset_bound"};
  const double k = static_cast<double>(table.k());
  for (std::size_t mask = 0; mask < full; ++mask) {
    double sum = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      if (mask & (std::size_t{1} << e)) sum += table.marginals()[e];
    }
    report.record(within[mask], std::pow(sum / k, k));
  }
  return report;
}

// Both sides of the weighted bound
//   sum_{I ⊆ [t], |I| = k} mu(tau_I) prod_{i in I} p(tau_i)^{-1}
//     <= (sum_i q_{tau_i} / (k p(tau_i)))^k
// where index sets whose images collide contribute zero.
struct WeightedBoundSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline WeightedBoundSides weighted_bound_sides(const ExactTable& table,
                                               std::span<const Element> tau,
                                               std::span<const double> p) {
  const std::size_t k = table.k();
  if (tau.size() < k) throw InputError("weighted bound needs |tau| >= k");
  if (p.size() != table.n()) throw InputError("weight vector must cover the ground set");
  for (double w : p) {
    if (!(w > 0.0)) throw InputError("weighted bound needs strictly positive p");
  }
  for (Element e : tau) {
    if (e >= table.n()) throw InputError("tau element outside ground set");
  }
  WeightedBoundSides sides;
  std::vector<Element> image(k);
  for_each_subset(tau.size(), k, [&](std::span<const Element> idx) {
    double inv_weight = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      image[j] = tau[idx[j]];
      inv_weight /= p[image[j]];
    }
    std::sort(image.begin(), image.end());
    if (std::adjacent_find(image.begin(), image.end()) != image.end()) return;
    sides.lhs += table.prob(image) * inv_weight;
  });
  double sum = 0.0;
  for (Element e : tau) sum += table.marginals()[e] / (static_cast<double>(k) * p[e]);
  sides.rhs = std::pow(sum, static_cast<double>(k));
  return sides;
}

inline InequalityReport verify_weighted_bound(const ExactTable& table,
                                              std::span<const Element> tau,
                                              std::span<const double> p) {
  const auto sides = weighted_bound_sides(table, tau, p);
  InequalityReport report{"weighted_bound"};
  report.record(sides.lhs, sides.rhs);
  return report;
}

// Collapses repeated entries of tau: an element seen m times becomes one entry
// with weight p(e) / m. Both sides of the weighted bound are unchanged.
struct MergedSequence {
  std::vector<Element> tau;
  std::vector<double> p;
};

inline MergedSequence merge_duplicates(std::span<const Element> tau, std::span<const double> p) {
  std::vector<std::size_t> multiplicity(p.size(), 0);
  for (Element e : tau) ++multiplicity.at(e);
  MergedSequence merged{{}, std::vector<double>(p.begin(), p.end())};
  for (Element e = 0; e < p.size(); ++e) {
    if (multiplicity[e] == 0) continue;
    merged.tau.push_back(e);
    merged.p[e] = p[e] / static_cast<double>(multiplicity[e]);
  }
  return merged;
}

// D(nu D_{k->l} | mu D_{k->l}) <= (l / k) D(nu | mu).
// Violation is measured against max(rhs, 1) so that divergences near zero are
// compared on an absolute scale.
inline InequalityReport verify_kl_contraction(const ExactTable& mu, const DistTable& nu,
                                              std::size_t l) {
  if (l > mu.k()) throw InputError("contraction level exceeds k");
  const double full = kl_divergence(nu, mu.distribution());
  if (full == kPosInf) throw InputError("nu must be supported inside supp(mu)");
  const double lhs = kl_divergence(down_operator(nu, l), down_operator(mu.distribution(), l));
  const double rhs = static_cast<double>(l) / static_cast<double>(mu.k()) * full;
  InequalityReport report{"kl_contraction"};
  report.instances = 1;
  report.worst_lhs = lhs;
  report.worst_rhs = rhs;
  report.max_violation = std::max(0.0, lhs - rhs) / std::max(rhs, 1.0);
  return report;
}

// Element i of the original ground set becomes multiplicity[i] consecutive
// copies; a subdivided set S' carries mu(pi(S')) / prod_{j in S'} m(pi(j)) when
// pi is injective on S' and zero otherwise.
struct Subdivision {
  std::unique_ptr<ExplicitDensity> density;
  std::vector<Element> projection;  // copy index -> original element
};

inline Subdivision subdivide(const ExplicitDensity& mu, std::span<const std::size_t> multiplicity,
                             std::uint64_t cap = kDefaultEnumerationCap) {
  if (multiplicity.size() != mu.n()) {
    throw InputError("subdivide needs one multiplicity per ground element");
  }
  std::vector<Element> first_copy(mu.n());
  std::vector<Element> projection;
  for (Element i = 0; i < mu.n(); ++i) {
    if (multiplicity[i] == 0) throw InputError("subdivision multiplicities must be >= 1");
    first_copy[i] = static_cast<Element>(projection.size());
    projection.insert(projection.end(), multiplicity[i], i);
  }
  const std::size_t m = projection.size();
  if (enumeration_size(m, mu.k()) > cap) {
    throw std::runtime_error("subdivided ground set of size " + std::to_string(m) +
                             " exceeds the enumeration cap");
  }
  WeightTable table;
  const std::size_t k = mu.k();
  std::vector<std::size_t> choice(k);
  std::vector<Element> image(k);
  for (const auto& [s, lw] : mu.log_weights()) {
    double log_w = lw;
    for (Element e : s) log_w -= std::log(static_cast<double>(multiplicity[e]));
    // odometer over the copy chosen for each element of s
    std::fill(choice.begin(), choice.end(), 0);
    while (true) {
      for (std::size_t j = 0; j < k; ++j) {
        image[j] = static_cast<Element>(first_copy[s[j]] + choice[j]);
      }
      table.emplace(image, log_w);  // images are increasing since s is
      std::size_t j = 0;
      while (j < k && ++choice[j] == multiplicity[s[j]]) choice[j++] = 0;
      if (j == k) break;
    }
  }
  return {ExplicitDensity::from_log_weights(m, k, table), std::move(projection)};
}

// Rebuilds an explicit table from any enumerable oracle.
inline std::unique_ptr<ExplicitDensity> to_explicit(const LogDensityOracle& oracle,
                                                    std::uint64_t cap = kDefaultEnumerationCap) {
  const ExactTable table = enumerate(oracle, cap);
  WeightTable weights;
  std::uint64_t r = 0;
  for_each_subset(oracle.n(), oracle.k(), [&](std::span<const Element> s) {
    const double lw = table.log_weights()[r++];
    if (lw > kNegInf) weights.emplace(std::vector<Element>(s.begin(), s.end()), lw);
  });
  return ExplicitDensity::from_log_weights(oracle.n(), oracle.k(), weights);
}

}  // namespace isosample
