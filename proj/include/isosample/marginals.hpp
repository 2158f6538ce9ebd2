#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "isosample/alias.hpp"
#include "isosample/density.hpp"
#include "isosample/down_up.hpp"
#include "isosample/isotropic.hpp"
#include "isosample/log_space.hpp"
#include "isosample/random.hpp"
#include "isosample/subset.hpp"

namespace isosample {

inline double default_schedule_ratio(std::size_t k) {
  const double kd = static_cast<double>(std::max<std::size_t>(k, 1));
  return 1.0 + 1.0 / (64.0 * kd * kd);
}

inline double default_estimation_epsilon(std::size_t k) {
  return 1.0 / (80.0 * static_cast<double>(std::max<std::size_t>(k, 1)));
}

// (1 - eps_est) r^{-k} >= (1 + 1/(20k))^{-1} with the default constants.
inline bool validity_budget_holds(std::size_t k) {
  const double kd = static_cast<double>(k);
  const double lhs = std::log1p(-default_estimation_epsilon(k)) -
                     kd * std::log(default_schedule_ratio(k));
  const double rhs = -std::log1p(1.0 / (20.0 * kd));
  return lhs >= rhs;
}

// Largest estimator width 1 - r^{-k} allowed with the default ratio.
inline bool ratio_width_bound_holds(std::size_t k) {
  const double kd = static_cast<double>(k);
  return -std::expm1(-kd * std::log(default_schedule_ratio(k))) <= 1.0 / (32.0 * kd);
}

// Admissible anchor: the densest of ceil(3 ln(1/delta)) down-up samples, each
// run to TV 1/8 from the oracle's support point.
template <RandomSource R>
SubsetState find_admissible(const LogDensityOracle& oracle, double delta, R& rng) {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  const auto runs = static_cast<std::size_t>(std::max(1.0, std::ceil(3.0 * std::log(1.0 / delta))));
  const SubsetState start = oracle.support_point();
  std::optional<SubsetState> best;
  double best_log = kNegInf;
  for (std::size_t i = 0; i < runs; ++i) {
    SubsetState s = downup_sample(oracle, start, 0.125, rng);
    const double w = oracle.log_density(s);
    if (!best || w > best_log) {
      best = std::move(s);
      best_log = w;
    }
  }
  return *best;
}

// Geometric tilts lambda_0 > ... > lambda_t = 1 anchored at U.
struct CoolingSchedule {
  SubsetState anchor;
  std::vector<double> log_lambda;  // length t + 1, last entry 0
  double ratio = 1.0;
  std::vector<std::shared_ptr<const TiltedDensity>> densities;

  std::size_t length() const { return log_lambda.size() - 1; }
  double log_lambda0() const { return log_lambda.front(); }
  const TiltedDensity& level(std::size_t i) const { return *densities.at(i); }
};

// Length of a schedule starting at log_lambda0 with step ln r.
inline std::size_t schedule_length(double log_lambda0, double ratio) {
  return static_cast<std::size_t>(std::ceil(log_lambda0 / std::log(ratio)));
}

// Doubles lambda_0 from 2 C(n, k) n until the point-mass TV bound
// 2 C(n, k) / lambda_0 is below both 1/n and eps / (8 t(lambda_0)).
inline double choose_log_lambda0(std::size_t n, std::size_t k, double epsilon, double ratio) {
  const double log_count = log_binomial(n, k);
  const double log_n = std::log(static_cast<double>(n));
  double log_lambda0 = std::log(2.0) + log_count + log_n;
  for (int i = 0; i < 4096; ++i) {
    const auto t = static_cast<double>(schedule_length(log_lambda0, ratio));
    const double log_tv = std::log(2.0) + log_count - log_lambda0;
    if (log_tv <= std::min(-log_n, std::log(epsilon / (8.0 * t)))) return log_lambda0;
    log_lambda0 += std::log(2.0);
  }
  throw std::runtime_error("choose_log_lambda0 did not converge");
}

// The oracle must outlive the schedule (levels hold a non-owning handle).
inline CoolingSchedule build_schedule(const LogDensityOracle& oracle, const SubsetState& anchor,
                                      double epsilon_target,
                                      std::optional<double> ratio = std::nullopt) {
  if (!(epsilon_target > 0.0 && epsilon_target < 1.0)) {
    throw InputError("schedule epsilon must lie in (0, 1)");
  }
  check_subset(anchor.elements(), oracle.n(), oracle.k());
  if (oracle.log_density(anchor) == kNegInf) {
    throw InputError("schedule anchor must lie in the support");
  }
  CoolingSchedule sched;
  sched.anchor = anchor;
  sched.ratio = ratio ? *ratio : default_schedule_ratio(oracle.k());
  if (!(sched.ratio > 1.0)) throw InputError("schedule ratio must exceed 1");
  const double step = std::log(sched.ratio);
  const double log_lambda0 = choose_log_lambda0(oracle.n(), oracle.k(), epsilon_target, sched.ratio);
  const std::size_t t = schedule_length(log_lambda0, sched.ratio);
  sched.log_lambda.resize(t + 1);
  for (std::size_t i = 0; i < t; ++i) sched.log_lambda[i] = log_lambda0 - static_cast<double>(i) * step;
  sched.log_lambda[t] = 0.0;
  std::shared_ptr<const LogDensityOracle> base(&oracle, [](const LogDensityOracle*) {});
  sched.densities.reserve(t + 1);
  for (double ll : sched.log_lambda) {
    sched.densities.push_back(std::make_shared<TiltedDensity>(base, anchor, ll));
  }
  return sched;
}

// p(i) = 1/(k+1) on U and 1/((k+1)(n-k)) off U.
inline SamplingDistribution initial_p(std::size_t n, std::size_t k, const SubsetState& anchor) {
  if (n <= k) throw InputError("initial_p needs n > k");
  if (anchor.size() != k) throw InputError("initial_p anchor must have k elements");
  const double kd = static_cast<double>(k);
  std::vector<double> w(n, 1.0 / ((kd + 1.0) * static_cast<double>(n - k)));
  for (Element e : anchor) w.at(e) = 1.0 / (kd + 1.0);
  return SamplingDistribution::build(w);
}

struct MarginalEstimate {
  SamplingDistribution p;
  std::size_t level = 0;
  double eps_est = 0.0;
  double delta_used = 0.0;
  std::size_t samples = 0;
  std::vector<double> qhat;
};

inline constexpr std::uint64_t kDefaultSampleBudget = 100'000'000;

// s = ceil(3 * 4^3 * (n / k) * eps^-3 * ln(2n / delta)), as a double since it
// easily exceeds any integer budget.
inline double marginal_sample_count(std::size_t n, std::size_t k, double eps, double delta) {
  const double nd = static_cast<double>(n);
  return std::ceil(3.0 * 64.0 * nd / static_cast<double>(k) / (eps * eps * eps) *
                   std::log(2.0 * nd / delta));
}

// Turns empirical marginals into p: (1 - 3eps/4) qhat_i / k above the
// threshold eps k / (3n), the remaining mass spread evenly below it.
inline SamplingDistribution marginals_to_p(std::span<const double> qhat, std::size_t k, double eps) {
  const std::size_t n = qhat.size();
  const double kd = static_cast<double>(k);
  const double threshold = eps * kd / (3.0 * static_cast<double>(n));
  std::vector<double> p(n, 0.0);
  double used = 0.0;
  std::size_t below = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (qhat[i] >= threshold) {
      p[i] = (1.0 - 0.75 * eps) * qhat[i] / kd;
      used += p[i];
    } else {
      ++below;
    }
  }
  if (below == 0) return SamplingDistribution::build(p);
  const double spread = (1.0 - used) / static_cast<double>(below);
  for (std::size_t i = 0; i < n; ++i) {
    if (qhat[i] < threshold) p[i] = spread;
  }
  return SamplingDistribution::build(p);
}

// Estimates marginals from a black-box sampler `draw()` returning k-subsets.
template <typename Draw>
  requires std::invocable<Draw&>
MarginalEstimate estimate_marginals(Draw&& draw, std::size_t n, std::size_t k, double eps,
                                    double delta, std::optional<std::size_t> samples = std::nullopt,
                                    std::uint64_t budget = kDefaultSampleBudget) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  if (k == 0 || k > n) throw InputError("estimate_marginals needs 1 <= k <= n");
  std::size_t s = 0;
  if (samples) {
    s = *samples;
  } else {
    const double needed = marginal_sample_count(n, k, eps, delta);
    if (needed > static_cast<double>(budget)) {
      throw std::runtime_error("marginal estimation needs " + format_whole(needed) +
                               " samples, above the budget of " + std::to_string(budget));
    }
    s = static_cast<std::size_t>(needed);
  }
  if (s == 0) throw InputError("marginal estimation needs at least one sample");
  std::vector<double> counts(n, 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    const SubsetState S = draw();
    for (Element e : S) counts.at(e) += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(s);
  MarginalEstimate est{marginals_to_p(counts, k, eps), 0, eps, delta, s, std::move(counts)};
  return est;
}

// Knobs of the oracle construction. Unset fields follow the asymptotic
// analysis, which is far beyond desk-scale budgets for most inputs; see
// practical().
struct PipelineConfig {
  std::optional<double> ratio;               // default 1 + 1/(64k^2)
  std::optional<double> eps_est;             // default 1/(80k)
  std::optional<std::size_t> samples_per_level;
  std::optional<IsotropicConfig> sampler;    // default: defaults(k, eps) per level
  bool warm_start = false;                   // continue one chain across draws and levels
  std::uint64_t sample_budget = kDefaultSampleBudget;
  std::size_t threads = 1;

  static PipelineConfig faithful() { return {}; }

  // Ratio 1 + 1/k^2, 400 draws per level from one warm-started chain with
  // t = 2k^2, s = k^2 and a single outer step per draw.
  static PipelineConfig practical(std::size_t k) {
    const std::size_t kk = std::max<std::size_t>(k, 1);
    PipelineConfig c;
    c.ratio = 1.0 + 1.0 / static_cast<double>(kk * kk);
    c.eps_est = 0.1;
    c.samples_per_level = 400;
    c.sampler = IsotropicConfig{2 * kk * kk, kk * kk, 1, 0.0};
    c.warm_start = true;
    return c;
  }
};

struct SampleBatch {
  std::vector<SubsetState> samples;
  std::uint64_t induced_queries = 0;
};

// Draws `count` samples of `oracle` with the isotropic sampler, split across
// `chains` independent chains (chain c uses rng.split(c)). With warm_start,
// each chain continues from its previous output; `starts` is updated to the
// chains' final states.
inline SampleBatch collect_isotropic_samples(const LogDensityOracle& oracle,
                                             const SamplingDistribution& p,
                                             const IsotropicConfig& config, std::size_t count,
                                             std::vector<SubsetState>& starts, bool warm_start,
                                             const Rng& rng) {
  const std::size_t chains = std::max<std::size_t>(starts.size(), 1);
  if (starts.empty()) throw InputError("collect_isotropic_samples needs a start state");
  SampleBatch batch;
  batch.samples.resize(count);
  std::vector<std::uint64_t> queries(chains, 0);
  auto worker = [&](std::size_t c) {
    Rng local = rng.split(c);
    IsotropicSampler sampler(oracle, p, config);
    SubsetState state = starts[c];
    for (std::size_t j = c; j < count; j += chains) {
      SubsetState next = sampler.sample(warm_start ? state : starts[c], local);
      batch.samples[j] = next;
      state = std::move(next);
    }
    queries[c] = sampler.induced_queries();
    if (warm_start) starts[c] = std::move(state);
  };
  if (chains == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(chains);
    for (std::size_t c = 0; c < chains; ++c) pool.emplace_back(worker, c);
    for (auto& th : pool) th.join();
  }
  for (std::uint64_t q : queries) batch.induced_queries += q;
  return batch;
}

struct IsotropyOracle {
  CoolingSchedule schedule;
  // estimates[i] is the p used to sample level i; estimates.back() serves mu.
  std::vector<MarginalEstimate> estimates;
  // overlaps[i][j]: level-i samples meeting the anchor in j elements
  std::vector<std::vector<std::size_t>> overlaps;
  std::uint64_t base_queries = 0;
  std::uint64_t induced_queries = 0;

  const SamplingDistribution& final_p() const { return estimates.back().p; }
};

inline MarginalEstimate initial_estimate(std::size_t n, std::size_t k, const SubsetState& anchor) {
  return MarginalEstimate{initial_p(n, k, anchor), 0, 0.0, 0.0, 0, {}};
}

// Admissible anchor, cooling schedule, then one marginal re-estimation per
// level, each feeding the next level's sampler.
inline IsotropyOracle build_isotropy_oracle(const LogDensityOracle& oracle, double delta, Rng& rng,
                                            double epsilon_target,
                                            const PipelineConfig& config = {}) {
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  const std::size_t n = oracle.n();
  const std::size_t k = oracle.k();
  if (k == 0 || k >= n) throw InputError("isotropy oracle needs 1 <= k < n");
  const std::uint64_t q0 = oracle.queries();
  IsotropyOracle out;
  const Rng root(rng.next());
  Rng admissible_rng = root.split(0);
  const SubsetState anchor = find_admissible(oracle, delta / 2.0, admissible_rng);
  out.schedule = build_schedule(oracle, anchor, epsilon_target, config.ratio);
  const std::size_t t = out.schedule.length();
  const double eps_est = config.eps_est ? *config.eps_est : default_estimation_epsilon(k);
  const double delta_level = delta / (2.0 * static_cast<double>(t));

  std::optional<std::size_t> samples = config.samples_per_level;
  if (!samples) {
    const double needed = marginal_sample_count(n, k, eps_est, delta_level);
    if (needed > static_cast<double>(config.sample_budget)) {
      throw std::runtime_error("marginal estimation needs " + format_whole(needed) +
                               " samples per level, above the budget of " +
                               std::to_string(config.sample_budget));
    }
    samples = static_cast<std::size_t>(needed);
  }
  IsotropicConfig sampler_config;
  if (config.sampler) {
    sampler_config = *config.sampler;
  } else {
    // per-sample TV folded into the level's failure budget
    const double eps_sample = std::min(0.5, delta_level / (2.0 * static_cast<double>(*samples)));
    sampler_config = IsotropicConfig::defaults(k, eps_sample);
  }

  out.estimates.reserve(t + 1);
  out.estimates.push_back(initial_estimate(n, k, anchor));
  std::vector<SubsetState> starts(std::max<std::size_t>(config.threads, 1), anchor);
  for (std::size_t i = 0; i < t; ++i) {
    const TiltedDensity& level = out.schedule.level(i);
    SampleBatch batch = collect_isotropic_samples(level, out.estimates.back().p, sampler_config,
                                                  *samples, starts, config.warm_start,
                                                  root.split(i + 1));
    out.induced_queries += batch.induced_queries;
    std::vector<std::size_t>& hist = out.overlaps.emplace_back(k + 1, 0);
    for (const SubsetState& s : batch.samples) ++hist[intersection_size(s.elements(), anchor.elements())];
    std::size_t next = 0;
    MarginalEstimate est = estimate_marginals(
        [&] { return batch.samples[next++]; }, n, k, eps_est, delta_level, *samples);
    est.level = i + 1;
    out.estimates.push_back(std::move(est));
  }
  out.base_queries = oracle.queries() - q0;
  return out;
}

}  // namespace isosample
