#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "isosample/isosample.hpp"
#include "test_util.hpp"

using namespace isosample;
using isosample::testing::explicit_uniform;
using isosample::testing::point_mass_density;
using isosample::testing::ScriptedRng;

TEST(DownUpSteps, Defaults) {
  EXPECT_EQ(downup_default_steps(1, 0.5), 3u);
  EXPECT_EQ(downup_default_steps(3, 0.05), static_cast<std::size_t>(std::ceil(12 * std::log(60.0))));
  EXPECT_EQ(downup_default_steps(2, 0.5, 1.0), 3u);
  EXPECT_THROW(downup_default_steps(2, 0.0), InputError);
  EXPECT_THROW(downup_default_steps(2, 0.6), InputError);
}

TEST(Categorical, ScriptedDraws) {
  const std::vector<double> logs{std::log(1.0), kNegInf, std::log(3.0)};
  ScriptedRng low({}, {0.1});
  EXPECT_EQ(categorical_from_logs(logs, low), 0u);
  ScriptedRng high({}, {0.5});
  EXPECT_EQ(categorical_from_logs(logs, high), 2u);
  ScriptedRng edge({}, {0.999999999});
  EXPECT_EQ(categorical_from_logs(logs, edge), 2u);
  const std::vector<double> none{kNegInf, kNegInf};
  ScriptedRng any({}, {0.5});
  EXPECT_THROW(categorical_from_logs(none, any), std::logic_error);
}

TEST(DownUpChain, PointMassNeverMoves) {
  const auto d = point_mass_density(6, SubsetState{2, 5});
  DownUpChain chain(*d, SubsetState{2, 5});
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    chain.step(rng);
    EXPECT_EQ(chain.state(), (SubsetState{2, 5}));
  }
  EXPECT_EQ(chain.steps_taken(), 200u);
  EXPECT_EQ(downup_sample(*d, SubsetState{2, 5}, 0.01, rng), (SubsetState{2, 5}));
}

TEST(DownUpChain, QueriesPerStep) {
  for (auto [n, k] : {std::pair<std::size_t, std::size_t>{6, 2}, {10, 4}, {5, 5}, {7, 1}}) {
    const UniformDensity u(n, k);
    DownUpChain chain(u, u.support_point());
    const std::uint64_t before = u.queries();
    Rng rng(2);
    for (int i = 0; i < 25; ++i) chain.step(rng);
    EXPECT_EQ(u.queries() - before, 25 * (n - k + 1));
  }
}

TEST(DownUpChain, UniformNextStateUniformOverCandidates) {
  // From {0,1} in U(5,2) each drop leaves 4 equally likely candidates.
  const UniformDensity u(5, 2);
  Rng rng(3);
  std::map<SubsetState, int> counts;
  const int trials = 200'000;
  for (int i = 0; i < trials; ++i) {
    DownUpChain chain(u, SubsetState{0, 1});
    chain.step(rng);
    ++counts[chain.state()];
  }
  // each of the 2 drops yields 4 equally likely outcomes; {0,1} appears under both
  EXPECT_EQ(counts.size(), 7u);
  EXPECT_NEAR(counts[(SubsetState{0, 1})] / double(trials), 2.0 / 8.0, 0.005);
  for (const auto& [s, c] : counts) {
    if (s != SubsetState{0, 1}) {
      EXPECT_NEAR(c / double(trials), 1.0 / 8.0, 0.005);
    }
  }
}

TEST(DownUpChain, RejectsStartOutsideSupport) {
  const ForestDensity d(complete_graph(3), 3);
  EXPECT_THROW(DownUpChain(d, SubsetState{0, 1, 2}), InputError);
  const ForestDensity ok(complete_graph(3), 2);
  EXPECT_THROW(DownUpChain(ok, SubsetState{0, 1, 2}), InputError);
  Rng rng(4);
  EXPECT_THROW(downup_sample(d, SubsetState{0, 1, 2}, 0.1, rng), InputError);
}

TEST(DownUpChain, UncheckedStartReportsRestoredWeight) {
  const ExplicitDensity d(4, 2, {{SubsetState{0, 1}, 1.0}});
  std::vector<Element> outside{2, 3};
  DownUpChain chain(d, outside, DownUpChain::Unchecked{});
  Rng rng(5);
  chain.step(rng);
  EXPECT_EQ(chain.restored_log_weight(), kNegInf);
  std::vector<Element> inside{0, 1};
  DownUpChain good(d, inside, DownUpChain::Unchecked{});
  good.step(rng);
  EXPECT_EQ(good.restored_log_weight(), 0.0);
}

TEST(TransitionMatrix, SpanningTreesOneStepFrequencies) {
  const ForestDensity d(complete_graph(4), 3);
  const ExactTable table = enumerate(d);
  const TransitionMatrix m = transition_matrix(d);
  const SubsetState start = d.support_point();
  const std::uint64_t row = table.indexer().rank(start.elements());
  Rng rng(6);
  std::vector<double> freq(m.size, 0.0);
  const int trials = 100'000;
  for (int i = 0; i < trials; ++i) {
    DownUpChain chain(d, start);
    chain.step(rng);
    freq[table.indexer().rank(chain.current())] += 1.0 / trials;
  }
  for (std::size_t j = 0; j < m.size; ++j) EXPECT_NEAR(freq[j], m(row, j), 0.01);
}

TEST(TransitionMatrix, KernelIdentities) {
  Rng rng(7);
  std::vector<std::unique_ptr<LogDensityOracle>> cases;
  cases.push_back(std::make_unique<ForestDensity>(complete_graph(4), 3));
  cases.push_back(std::make_unique<ForestDensity>(petersen_graph(), 3));
  cases.push_back(std::make_unique<DppDensity>(random_psd_kernel(7, 7, rng), 3));
  cases.push_back(explicit_uniform(6, 3));
  for (const auto& d : cases) {
    const ExactTable table = enumerate(*d);
    const KernelReport r = check_kernel(table, transition_matrix(*d));
    EXPECT_LE(r.row_sum_error, 1e-12);
    EXPECT_LE(r.detailed_balance_error, 1e-12);
    EXPECT_LE(r.stationarity_error, 1e-10);
  }
}

TEST(TransitionMatrix, Cap) {
  const UniformDensity u(20, 10);
  EXPECT_THROW(transition_matrix(u), std::runtime_error);
}

TEST(DownUpSample, SpanningTreesTv) {
  const ForestDensity d(complete_graph(4), 3);
  const ExactTable table = enumerate(d);
  Rng rng(8);
  const SubsetState start = d.support_point();
  std::vector<std::uint64_t> ranks;
  const std::size_t runs = 100'000;
  ranks.reserve(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    ranks.push_back(table.indexer().rank(downup_sample(d, start, 0.05, rng).elements()));
  }
  EXPECT_LE(empirical_tv(ranks, table), 0.08);
}

TEST(DownUpSample, Reproducible) {
  const ForestDensity d(complete_graph(5), 4);
  Rng a(9), b(9);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(downup_sample(d, d.support_point(), 0.1, a), downup_sample(d, d.support_point(), 0.1, b));
  }
}

TEST(DownUpSample, StepOverrideAndQueryBound) {
  const UniformDensity u(9, 3);
  Rng rng(10);
  u.reset_queries();
  downup_sample(u, u.support_point(), 0.1, rng, 17);
  EXPECT_EQ(u.queries(), 1 + 17 * (9 - 3 + 1));
}
