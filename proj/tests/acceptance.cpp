// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "isosample/isosample.hpp"

using namespace isosample;

namespace {

const std::string kFixtures = FIXTURE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

// Simple graphs on 6 labelled vertices, one per isomorphism class. Smaller
// graphs appear with isolated vertices.
std::vector<Graph> graphs_up_to_isomorphism() {
  constexpr std::size_t v = 6;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> slots;
  std::array<std::array<int, v>, v> slot_of{};
  for (std::uint32_t a = 0; a < v; ++a) {
    for (std::uint32_t b = a + 1; b < v; ++b) {
      slot_of[a][b] = slot_of[b][a] = static_cast<int>(slots.size());
      slots.emplace_back(a, b);
    }
  }
  std::vector<std::array<int, v>> perms;
  std::array<int, v> perm;
  std::iota(perm.begin(), perm.end(), 0);
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<Graph> out;
  const std::uint32_t masks = 1u << slots.size();
  for (std::uint32_t mask = 1; mask < masks; ++mask) {
    bool canonical = true;
    for (const auto& pi : perms) {
      std::uint32_t image = 0;
      for (std::size_t e = 0; e < slots.size(); ++e) {
        if (mask >> e & 1u) image |= 1u << slot_of[pi[slots[e].first]][pi[slots[e].second]];
      }
      if (image < mask) {
        canonical = false;
        break;
      }
    }
    if (!canonical) continue;
    Graph g{v, {}};
    for (std::size_t e = 0; e < slots.size(); ++e) {
      if (mask >> e & 1u) g.edges.push_back(slots[e]);
    }
    out.push_back(std::move(g));
  }
  return out;
}

Outcome criterion1() {
  Rng rng(1001);
  const SuiteOptions opts{20, 20};
  SuiteReport report;
  std::size_t instances = 0;
  auto check = [&](const LogDensityOracle& d) {
    const ExactTable table = enumerate(d);
    run_inequality_checks(table, rng, opts, report);
    ++instances;
  };
  const std::vector<Graph> graphs = graphs_up_to_isomorphism();
  for (const Graph& g : graphs) {
    const std::size_t rank = graphic_rank(g);
    for (std::size_t k = 1; k <= std::min<std::size_t>(rank, 4); ++k) check(ForestDensity(g, k));
  }
  std::vector<std::shared_ptr<const LogDensityOracle>> dpps;
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 1 + rng.uniform_index(4);
    const std::size_t n = k + 1 + rng.uniform_index(8 - k);
    const std::size_t rank = k + rng.uniform_index(n - k + 1);
    dpps.push_back(std::make_shared<DppDensity>(random_psd_kernel(n, rank, rng), k));
    check(*dpps.back());
  }
  for (int i = 0; i < 50; ++i) {
    std::shared_ptr<const LogDensityOracle> base;
    if (i % 2 == 0) {
      base = dpps[rng.uniform_index(dpps.size())];
    } else {
      const Graph& g = graphs[rng.uniform_index(graphs.size())];
      base = std::make_shared<ForestDensity>(g, 1 + rng.uniform_index(std::min<std::size_t>(graphic_rank(g), 4)));
    }
    const SubsetState anchor = enumerate(*base).sample(rng);
    check(TiltedDensity(base, anchor, 3.0 * standard_normal(rng)));
  }
  std::string worst;
  double worst_violation = 0.0;
  for (const auto& [name, r] : report) {
    if (r.max_violation >= worst_violation) {
      worst_violation = r.max_violation;
      worst = name;
    }
  }
  return {suite_passes(report), std::to_string(graphs.size()) + " graphs, " + std::to_string(instances) +
                                    " instances, max relative violation " + fmt(worst_violation) +
                                    (worst.empty() ? "" : " (" + worst + ")")};
}

Outcome criterion2() {
  struct Case {
    std::string name;
    std::shared_ptr<const LogDensityOracle> mu;
  };
  const std::vector<Case> cases = {{"U(4,2)", std::make_shared<UniformDensity>(4, 2)},
                                   {"U(6,2)", std::make_shared<UniformDensity>(6, 2)},
                                   {"K4", std::make_shared<ForestDensity>(complete_graph(4), 3)}};
  Rng rng(2002);
  double worst = 0.0;
  std::size_t runs = 0;
  for (const Case& c : cases) {
    const std::size_t n = c.mu->n();
    // mass piled on one element, and weights spanning three orders of magnitude
    std::vector<double> spike(n, 0.1 / static_cast<double>(n - 1));
    spike[0] = 0.9;
    std::vector<double> geometric(n);
    for (std::size_t i = 0; i < n; ++i) geometric[i] = std::pow(1000.0, static_cast<double>(i) / static_cast<double>(n - 1));
    for (const auto& w : {spike, geometric}) {
      const SamplingDistribution p = SamplingDistribution::build(w);
      for (std::size_t t : {1u, 3u}) {
        worst = std::max(worst, exact_outer_kernel_tv(*c.mu, p, t, 1'000'000, rng));
        ++runs;
      }
    }
  }
  return {worst <= 0.01, std::to_string(runs) + " (instance, p, t) runs of 1e6 trials, max TV " + fmt(worst)};
}

Outcome criterion3() {
  struct Fixture {
    std::string name;
    std::shared_ptr<const LogDensityOracle> mu;
  };
  auto graph = [](const std::string& f) {
    return read_file(kFixtures + "/" + f, [](std::istream& in, const std::string& s) { return read_graph(in, s); });
  };
  auto matrix = [](const std::string& f) {
    return read_file(kFixtures + "/" + f, [](std::istream& in, const std::string& s) { return read_matrix(in, s); });
  };
  std::vector<Fixture> fixtures;
  for (const char* f : {"k4.graph", "k5.graph", "petersen.graph"}) {
    Graph g = graph(f);
    const std::size_t rank = graphic_rank(g);
    for (std::size_t k = 1; k <= rank; ++k) {
      if (enumeration_size(g.edges.size(), k) > kTransitionMatrixCap) continue;
      fixtures.push_back({f, std::make_shared<ForestDensity>(g, k)});
    }
  }
  for (std::size_t k = 1; k <= 5; ++k) fixtures.push_back({"dpp5", std::make_shared<DppDensity>(matrix("dpp5.matrix"), k)});
  for (std::size_t k = 1; k <= 3; ++k) {
    fixtures.push_back({"fano", std::make_shared<LinearMatroidDensity>(matrix("fano.matrix"), k)});
  }
  fixtures.push_back({"u42", std::shared_ptr<const LogDensityOracle>(read_file(
                                 kFixtures + "/u42.explicit",
                                 [](std::istream& in, const std::string& s) { return read_explicit(in, s); }))});
  KernelReport worst;
  for (const Fixture& f : fixtures) {
    const ExactTable table = enumerate(*f.mu);
    const KernelReport r = check_kernel(table, transition_matrix(*f.mu));
    worst.row_sum_error = std::max(worst.row_sum_error, r.row_sum_error);
    worst.detailed_balance_error = std::max(worst.detailed_balance_error, r.detailed_balance_error);
    worst.stationarity_error = std::max(worst.stationarity_error, r.stationarity_error);
  }
  const bool kernels = worst.row_sum_error <= 1e-10 && worst.detailed_balance_error <= 1e-10 &&
                       worst.stationarity_error <= 1e-10;

  const ForestDensity k4(complete_graph(4), 3);
  const ExactTable table = enumerate(k4);
  const double eps = 0.05;
  const std::size_t samples = 100'000;
  Rng rng(3003);
  std::vector<SubsetState> out;
  out.reserve(samples);
  const SubsetState start = k4.support_point();
  for (std::size_t i = 0; i < samples; ++i) {
    Rng chain = rng.split(i);
    out.push_back(downup_sample(k4, start, eps, chain));
  }
  const double tv = empirical_tv(out, table);
  const double bound = eps + tv_noise_3sigma(table, samples);
  return {kernels && tv <= bound,
          std::to_string(fixtures.size()) + " fixture kernels: row " + fmt(worst.row_sum_error) + ", balance " +
              fmt(worst.detailed_balance_error) + ", stationarity " + fmt(worst.stationarity_error) +
              "; K4 down-up TV " + fmt(tv) + " <= " + fmt(bound)};
}

Outcome criterion4() {
  struct Case {
    std::string name;
    std::shared_ptr<const LogDensityOracle> mu;
  };
  const std::vector<Case> cases = {{"K4", std::make_shared<ForestDensity>(complete_graph(4), 3)},
                                   {"U(6,2)", std::make_shared<UniformDensity>(6, 2)}};
  const double eps = 0.1;
  const std::size_t samples = 100'000;
  bool pass = true;
  std::string detail;
  Rng rng(4004);
  for (const Case& c : cases) {
    const std::size_t k = c.mu->k();
    Rng pipeline_rng = rng.split(0);
    const IsotropyOracle iso = build_isotropy_oracle(*c.mu, 0.1, pipeline_rng, eps, PipelineConfig::practical(k));
    const IsotropicConfig cfg = IsotropicConfig::defaults(k, eps);
    std::vector<SubsetState> starts{c.mu->support_point()};
    const SampleBatch batch = collect_isotropic_samples(*c.mu, iso.final_p(), cfg, samples, starts, false, rng.split(1));
    const double tv = empirical_tv(batch.samples, enumerate(*c.mu));
    pass = pass && tv <= 0.12;
    detail += (detail.empty() ? "" : ", ") + c.name + " TV " + fmt(tv);
  }
  return {pass, detail + " (bound 0.12, 1e5 samples each)"};
}

Outcome criterion5() {
  struct Case {
    std::string name;
    std::shared_ptr<const LogDensityOracle> mu;
    double exact;
  };
  const Rational k4_trees = exact_spanning_trees(complete_graph(4));
  const Rational k5_trees = exact_spanning_trees(complete_graph(5));
  const bool oracle_ok = k4_trees == 16 && k5_trees == 125 &&
                         exact_forest_count(complete_graph(4), 3) == 16 &&
                         exact_forest_count(complete_graph(5), 4) == 125 &&
                         std::exp(enumerate(UniformDensity(8, 3)).log_partition()) > 55.999999 &&
                         std::exp(enumerate(UniformDensity(8, 3)).log_partition()) < 56.000001;
  const std::vector<Case> cases = {{"K4", std::make_shared<ForestDensity>(complete_graph(4), 3), 16.0},
                                   {"K5", std::make_shared<ForestDensity>(complete_graph(5), 4), 125.0},
                                   {"U(8,3)", std::make_shared<UniformDensity>(8, 3), 56.0}};
  bool pass = oracle_ok;
  std::string detail = oracle_ok ? "matrix-tree agrees with enumeration" : "matrix-tree MISMATCH";
  for (const Case& c : cases) {
    int ok = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(5000 + seed);
      const CountEstimate est = count(*c.mu, 0.1, 0.1, rng, CountConfig::practical(c.mu->k()));
      const double rel = std::abs(std::exp(est.log_Z_hat) / c.exact - 1.0);
      worst = std::max(worst, rel);
      ok += rel <= 0.1 ? 1 : 0;
    }
    pass = pass && ok >= 18;
    detail += "; " + c.name + " " + std::to_string(ok) + "/20 (worst " + fmt(worst) + ")";
  }
  return {pass, detail};
}

Outcome criterion6() {
  const UniformDensity u(6, 2);
  const ExactTable table = enumerate(u);
  const double eps = 0.2;
  Rng rng(6006);
  int ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const MarginalEstimate est = estimate_marginals([&] { return table.sample(rng); }, 6, 2, eps, 0.1);
    bool all = true;
    for (Element i = 0; i < 6; ++i) all = all && 2.0 * est.p.p(i) >= (1.0 - eps) * table.marginals()[i];
    ok += all ? 1 : 0;
  }
  bool constants = true;
  for (std::size_t k = 1; k <= 64; ++k) constants = constants && validity_budget_holds(k);
  return {ok >= 45 && constants,
          std::to_string(ok) + "/50 trials valid; budget inequality " + (constants ? "holds" : "FAILS") +
              " for k = 1..64"};
}

Outcome criterion7() {
  const std::size_t k = 2;
  const double eps = 0.1;
  const IsotropicConfig cfg = IsotropicConfig::defaults(k, eps);
  const std::size_t samples = 20;
  std::vector<double> induced, base;
  for (std::size_t n : {1'000u, 100'000u}) {
    const UniformDensity mu(n, k);
    const SamplingDistribution p = SamplingDistribution::uniform(n);
    IsotropicSampler sampler(mu, p, cfg);
    Rng rng(7007);
    SubsetState state = mu.support_point();
    const std::uint64_t q0 = mu.queries();
    for (std::size_t i = 0; i < samples; ++i) state = sampler.sample(state, rng);
    induced.push_back(static_cast<double>(sampler.induced_queries()) / samples);
    base.push_back(static_cast<double>(mu.queries() - q0) / samples);
  }
  const double bound = static_cast<double>(cfg.queries_per_sample());
  const bool pass = induced[0] == induced[1] && induced[0] <= bound && base[0] <= bound && base[1] <= bound;
  return {pass, "oracle queries per sample " + fmt(induced[0]) + " at n=1e3, " + fmt(induced[1]) +
                    " at n=1e5, bound l*s*(t+1) = " + fmt(bound) + "; base calls after collisions " +
                    fmt(base[0]) + " / " + fmt(base[1])};
}

std::string run_cli(const std::string& args, int& status) {
  const std::string cmd = std::string(CLI_PATH) + " " + args + " 2>/dev/null";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  status = pclose(pipe);
  return out;
}

Outcome criterion8() {
  const std::string f = kFixtures + "/";
  const std::vector<std::string> invocations = {
      "--seed 11 --threads 1 sample --graph " + f + "k4.graph --mode downup -n 200 --epsilon 0.05",
      "--seed 12 --threads 1 sample --graph " + f + "k4.graph -n 50",
      "--seed 13 --threads 1 sample --dpp " + f + "dpp5.matrix -k 2 -n 50 --p exact",
      "--seed 14 --threads 1 count --uniform 8 -k 3 --exact-crosscheck",
      "--seed 15 --threads 1 marginals --linear " + f + "fano.matrix",
      "--seed 16 --threads 1 verify --graph " + f + "petersen.graph -k 3",
      "--seed 17 --threads 1 verify --trials 5",
      "--seed 18 --threads 1 bench --sizes 1000,100000 -k 2 --samples 3",
  };
  int identical = 0;
  for (const std::string& args : invocations) {
    int s1 = 0, s2 = 0;
    const std::string a = run_cli(args, s1);
    const std::string b = run_cli(args, s2);
    identical += (s1 == 0 && s2 == 0 && !a.empty() && a == b) ? 1 : 0;
  }
  return {identical == static_cast<int>(invocations.size()),
          std::to_string(identical) + "/" + std::to_string(invocations.size()) +
              " invocations byte-identical across two runs"};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double time_limit = 0.0;  // seconds, 0 = none
  };
  const std::vector<Criterion> criteria = {
      {"1 negative dependence suite", criterion1, 300.0},
      {"2 outer-step stationarity", criterion2, 600.0},
      {"3 down-up correctness", criterion3},
      {"4 end-to-end isotropic sampling", criterion4},
      {"5 counting", criterion5},
      {"6 marginal pipeline", criterion6},
      {"7 n-independent query cost", criterion7},
      {"8 CLI reproducibility", criterion8},
  };
  int failures = 0;
  for (const auto& [name, fn, limit] : criteria) {
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (limit > 0.0 && secs > limit) {
      o.pass = false;
      o.detail += "; over the " + fmt(limit) + " s limit";
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << name << ": " << o.detail << " [" << fmt(secs)
              << " s]" << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
