#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isosample/density.hpp"
#include "isosample/exact.hpp"
#include "isosample/graph.hpp"
#include "isosample/isotropic.hpp"
#include "isosample/log_space.hpp"
#include "isosample/marginals.hpp"
#include "isosample/random.hpp"
#include "isosample/subset.hpp"

namespace isosample {

struct LevelRatio {
  double mean = 1.0;
  std::size_t samples = 0;
};

struct CountEstimate {
  double log_Z_hat = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double log_Z0 = 0.0;
  std::vector<LevelRatio> per_level;
  std::size_t schedule_length = 0;
  std::uint64_t preprocess_queries = 0;   // base oracle, schedule and marginals
  std::uint64_t sampling_queries = 0;     // base oracle, ratio samples
  std::uint64_t induced_queries = 0;      // inner-walk evaluations, all phases
};

// The estimator value at level i for a sample meeting the anchor in `overlap`
// elements: (lambda_{i+1} / lambda_i)^{overlap}.
inline double ratio_value(const CoolingSchedule& sched, std::size_t level, std::size_t overlap) {
  const double step = sched.log_lambda.at(level + 1) - sched.log_lambda.at(level);
  return std::exp(static_cast<double>(overlap) * step);
}

// Mean of the level-i ratio estimator over m draws from `draw()`, which must
// sample mu_i. Each value must lie in [(lambda_{i+1}/lambda_i)^k, 1].
template <typename Draw>
  requires std::invocable<Draw&>
LevelRatio ratio_estimate(const CoolingSchedule& sched, std::size_t level, Draw&& draw,
                          std::size_t m) {
  if (level >= sched.length()) throw InputError("ratio level outside the schedule");
  if (m == 0) throw InputError("ratio estimate needs at least one sample");
  const std::size_t k = sched.anchor.size();
  const double lo = ratio_value(sched, level, k);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const SubsetState s = draw();
    const double v = ratio_value(sched, level, intersection_size(s.elements(), sched.anchor.elements()));
    if (v < lo * (1.0 - 1e-12) || v > 1.0) {
      throw std::logic_error("ratio estimator value outside [(lambda_{i+1}/lambda_i)^k, 1]");
    }
    total += v;
  }
  return {total / static_cast<double>(m), m};
}

// The same mean computed from a histogram of overlaps |S ∩ U|.
inline LevelRatio ratio_from_overlaps(const CoolingSchedule& sched, std::size_t level,
                                      std::span<const std::size_t> overlaps) {
  if (level >= sched.length()) throw InputError("ratio level outside the schedule");
  double total = 0.0;
  std::size_t m = 0;
  for (std::size_t j = 0; j < overlaps.size(); ++j) {
    total += static_cast<double>(overlaps[j]) * ratio_value(sched, level, j);
    m += overlaps[j];
  }
  if (m == 0) throw InputError("ratio estimate needs at least one sample");
  return {total / static_cast<double>(m), m};
}

// Hoeffding count m = ceil(2 (2 t w / eps)^2 ln(8t / delta)) for a value range
// of width w.
inline double ratio_sample_count(std::size_t t, double width, double eps, double delta) {
  const double td = static_cast<double>(t);
  const double a = 2.0 * td * width / eps;
  return std::ceil(2.0 * a * a * std::log(8.0 * td / delta));
}

struct CountConfig {
  PipelineConfig pipeline;
  std::optional<std::size_t> ratio_samples;      // per level; default from ratio_sample_count
  std::optional<IsotropicConfig> sampler;        // default: defaults(k, eps / (4t))
  bool warm_start = false;
  // Estimate each ratio from the samples the oracle construction already drew
  // at that level instead of drawing fresh ones.
  bool reuse_pipeline_samples = false;

  static CountConfig faithful() { return {}; }

  static CountConfig practical(std::size_t k) {
    CountConfig c;
    c.pipeline = PipelineConfig::practical(k);
    c.sampler = c.pipeline.sampler;
    c.warm_start = true;
    c.reuse_pipeline_samples = true;
    return c;
  }
};

// Z = Z_0 prod_i Z_{i+1}/Z_i with Z_0 ~ lambda_0^k mu(U); half of delta goes
// to the isotropy oracle, half to the ratio estimates.
inline CountEstimate count(const LogDensityOracle& oracle, double eps, double delta, Rng& rng,
                           const CountConfig& config = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
  const std::size_t k = oracle.k();
  const std::uint64_t q_start = oracle.queries();
  const Rng root(rng.next());
  Rng pipeline_rng = root.split(0);
  IsotropyOracle iso = build_isotropy_oracle(oracle, delta / 2.0, pipeline_rng, eps, config.pipeline);
  const CoolingSchedule& sched = iso.schedule;
  const std::size_t t = sched.length();

  CountEstimate out;
  out.eps = eps;
  out.delta = delta;
  out.schedule_length = t;
  out.induced_queries = iso.induced_queries;
  out.log_Z0 = static_cast<double>(k) * sched.log_lambda0() + oracle.log_density(sched.anchor);
  out.preprocess_queries = oracle.queries() - q_start;

  const bool default_ratio = !config.pipeline.ratio;
  const std::size_t chains = std::max<std::size_t>(config.pipeline.threads, 1);
  std::vector<SubsetState> starts(chains, sched.anchor);
  const std::uint64_t q_sampling = oracle.queries();
  double log_z = out.log_Z0;
  for (std::size_t i = 0; i < t; ++i) {
    const double width = -std::expm1(static_cast<double>(k) *
                                      (sched.log_lambda[i + 1] - sched.log_lambda[i]));
    if (default_ratio && width > 1.0 / (32.0 * static_cast<double>(k))) {
      throw std::logic_error("ratio estimator width exceeds 1/(32k)");
    }
    if (config.reuse_pipeline_samples) {
      const LevelRatio r = ratio_from_overlaps(sched, i, iso.overlaps.at(i));
      out.per_level.push_back(r);
      log_z += std::log(r.mean);
      continue;
    }
    std::size_t m = 0;
    if (config.ratio_samples) {
      m = *config.ratio_samples;
    } else {
      const double needed = ratio_sample_count(t, width, eps, delta);
      if (needed > static_cast<double>(config.pipeline.sample_budget)) {
        throw std::runtime_error("ratio estimation at level " + std::to_string(i) + " needs " +
                                 format_whole(needed) +
                                 " samples, above the budget");
      }
      m = std::max<std::size_t>(static_cast<std::size_t>(needed), 1);
    }
    const IsotropicConfig sampler_config =
        config.sampler ? *config.sampler
                       : IsotropicConfig::defaults(k, std::min(0.5, eps / (4.0 * static_cast<double>(t))));
    SampleBatch batch = collect_isotropic_samples(sched.level(i), iso.estimates.at(i).p,
                                                  sampler_config, m, starts, config.warm_start,
                                                  root.split(i + 1));
    out.induced_queries += batch.induced_queries;
    std::size_t next = 0;
    const LevelRatio r = ratio_estimate(sched, i, [&] { return batch.samples[next++]; }, m);
    out.per_level.push_back(r);
    log_z += std::log(r.mean);
  }
  out.log_Z_hat = log_z;
  out.sampling_queries = oracle.queries() - q_sampling;
  return out;
}

// Number of spanning trees by the matrix-tree theorem.
inline Rational exact_spanning_trees(const Graph& g) { return spanning_tree_count(g); }

// Number of k-edge forests by enumeration over C(|E|, k).
inline std::uint64_t exact_forest_count(const Graph& g, std::size_t k,
                                        std::uint64_t cap = kDefaultEnumerationCap) {
  const ForestDensity forests(g, k);
  if (enumeration_size(forests.n(), k) > cap) {
    throw std::runtime_error("forest enumeration exceeds the cap");
  }
  std::uint64_t count = 0;
  for_each_subset(forests.n(), k, [&](std::span<const Element> s) {
    if (forests.log_density(s) == 0.0) ++count;
  });
  return count;
}

}  // namespace isosample
