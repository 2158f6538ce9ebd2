#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "isosample/alias.hpp"
#include "isosample/density.hpp"
#include "isosample/down_up.hpp"
#include "isosample/exact.hpp"
#include "isosample/graph.hpp"
#include "isosample/isotropic.hpp"
#include "isosample/negative_dependence.hpp"
#include "isosample/random.hpp"

namespace isosample {

// Check name -> worst case over everything recorded so far. Ordered so that
// printed reports are stable.
using SuiteReport = std::map<std::string, InequalityReport>;

// Kernel checks record an absolute error rather than an inequality.
inline void record_error(SuiteReport& report, const std::string& check, double error) {
  InequalityReport& r = report[check];
  r.check = check;
  ++r.instances;
  if (error > r.max_violation) {
    r.max_violation = error;
    r.worst_lhs = error;
    r.worst_rhs = 0.0;
  }
}

inline void merge_into(SuiteReport& report, const InequalityReport& r) {
  InequalityReport& slot = report[r.check];
  slot.check = r.check;
  slot.merge(r);
}

// Gaussian via Box-Muller, enough for random test weights.
template <RandomSource R>
double standard_normal(R& rng) {
  const double u = 1.0 - rng.uniform01();
  const double v = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

// A random distribution supported inside supp(mu): log-normal weights on a
// random nonempty part of the support.
template <RandomSource R>
DistTable random_distribution_within(const ExactTable& mu, R& rng) {
  DistTable nu(mu.n(), mu.k());
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < mu.probs().size(); ++i) {
    if (mu.probs()[i] > 0.0) support.push_back(i);
  }
  const double keep = 0.2 + 0.8 * rng.uniform01();
  for (std::size_t i : support) {
    if (rng.uniform01() < keep) nu.probs[i] = std::exp(2.0 * standard_normal(rng));
  }
  nu.probs[support[rng.uniform_index(support.size())]] += 1.0;
  nu.normalize();
  return nu;
}

// Random n x rank Gaussian factor B, returning the PSD kernel B B^T.
template <RandomSource R>
DenseMatrix<double> random_psd_kernel(std::size_t n, std::size_t rank, R& rng) {
  DenseMatrix<double> b(n, rank);
  for (double& x : b.data) x = standard_normal(rng);
  DenseMatrix<double> l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < rank; ++c) acc += b(i, c) * b(j, c);
      l(i, j) = l(j, i) = acc;
    }
  }
  return l;
}

struct SuiteOptions {
  std::size_t tau_trials = 20;
  std::size_t nu_trials = 20;
};

// All negative-dependence checks on one enumerated density.
template <RandomSource R>
void run_inequality_checks(const ExactTable& table, R& rng, const SuiteOptions& opts,
                           SuiteReport& report) {
  const std::size_t n = table.n();
  const std::size_t k = table.k();
  merge_into(report, verify_point_negcorr(table));
  for (std::size_t l = 1; l <= k; ++l) merge_into(report, verify_alpha_bound(table, l));
  merge_into(report, verify_subset_bound_all(table));
  for (std::size_t trial = 0; trial < opts.tau_trials && k > 0; ++trial) {
    const std::size_t len = k + rng.uniform_index(n + 2);
    std::vector<Element> tau(len);
    for (auto& e : tau) e = static_cast<Element>(rng.uniform_index(n));
    std::vector<double> p(n);
    for (double& w : p) w = std::exp(standard_normal(rng));
    merge_into(report, verify_weighted_bound(table, tau, p));
  }
  for (std::size_t trial = 0; trial < opts.nu_trials && k > 1; ++trial) {
    const DistTable nu = random_distribution_within(table, rng);
    const std::size_t l = 1 + rng.uniform_index(k - 1);
    merge_into(report, verify_kl_contraction(table, nu, l));
  }
}

// Exact kernels of the down-up walk and of the outer step (t in {1, 2},
// skewed p) against stationarity and, for the walk, detailed balance.
template <RandomSource R>
void run_stationarity_checks(const LogDensityOracle& oracle, const ExactTable& table, R& rng,
                             SuiteReport& report) {
  if (enumeration_size(oracle.n(), oracle.k()) > kTransitionMatrixCap) return;
  const KernelReport walk = check_kernel(table, transition_matrix(oracle));
  record_error(report, "downup_row_sum", walk.row_sum_error);
  record_error(report, "downup_detailed_balance", walk.detailed_balance_error);
  record_error(report, "downup_stationarity", walk.stationarity_error);
  if (oracle.k() == 0) return;
  std::vector<double> w(oracle.n());
  for (double& x : w) x = std::exp(1.5 * standard_normal(rng));
  const SamplingDistribution p = SamplingDistribution::build(w);
  for (std::size_t t : {std::size_t{1}, std::size_t{2}}) {
    TransitionMatrix outer;
    try {
      outer = exact_outer_kernel(oracle, p, t);
    } catch (const std::runtime_error&) {
      continue;  // too large to enumerate
    }
    const KernelReport kr = check_kernel(table, outer);
    record_error(report, "outer_row_sum", kr.row_sum_error);
    record_error(report, "outer_stationarity", kr.stationarity_error);
  }
}

// Tolerances: relative slack for inequalities, absolute error for kernels.
inline constexpr double kInequalityTolerance = 1e-9;
inline constexpr double kKernelTolerance = 1e-10;

inline bool is_kernel_check(const std::string& name) {
  return name.rfind("downup_", 0) == 0 || name.rfind("outer_", 0) == 0;
}

inline bool suite_passes(const SuiteReport& report) {
  for (const auto& [name, r] : report) {
    if (!r.holds(is_kernel_check(name) ? kKernelTolerance : kInequalityTolerance)) return false;
  }
  return true;
}

struct NamedDensity {
  std::string name;
  std::shared_ptr<const LogDensityOracle> density;
};

// Small log-concave instances of every built-in family, plus tilts.
template <RandomSource R>
std::vector<NamedDensity> builtin_families(R& rng) {
  std::vector<NamedDensity> out;
  out.push_back({"uniform_5_2", std::make_shared<UniformDensity>(5, 2)});
  out.push_back({"uniform_6_3", std::make_shared<UniformDensity>(6, 3)});
  out.push_back({"trees_k4", std::make_shared<ForestDensity>(complete_graph(4), 3)});
  out.push_back({"forests_k5_3", std::make_shared<ForestDensity>(complete_graph(5), 3)});
  out.push_back({"forests_cycle6_4", std::make_shared<ForestDensity>(cycle_graph(6), 4)});
  DenseMatrix<double> diag(4, 4);
  for (std::size_t i = 0; i < 4; ++i) diag(i, i) = static_cast<double>(i + 1);
  out.push_back({"dpp_diag_4_2", std::make_shared<DppDensity>(diag, 2)});
  for (int i = 0; i < 3; ++i) {
    const std::size_t n = 5 + rng.uniform_index(3);
    const std::size_t k = 2 + rng.uniform_index(2);
    out.push_back({"dpp_random_" + std::to_string(i),
                   std::make_shared<DppDensity>(random_psd_kernel(n, n, rng), k)});
  }
  DenseMatrix<double> a(3, 6);
  const double cols[6][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, 1}, {1, 1, 1}};
  for (std::size_t j = 0; j < 6; ++j) {
    for (std::size_t i = 0; i < 3; ++i) a(i, j) = cols[j][i];
  }
  out.push_back({"linear_3x6", std::make_shared<LinearMatroidDensity>(a, 3)});
  const std::size_t base_count = out.size();
  for (std::size_t i = 0; i < base_count; ++i) {
    const auto base = out[i].density;
    const SubsetState anchor = base->support_point();
    const double log_lambda = 3.0 * standard_normal(rng);
    out.push_back({out[i].name + "_tilted",
                   std::make_shared<TiltedDensity>(base, anchor, log_lambda)});
  }
  return out;
}

}  // namespace isosample
