#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isosample/isosample.hpp"

namespace isosample::cli {

struct InputOptions {
  std::string graph;
  std::string dpp;
  std::string linear;
  std::string explicit_table;
  std::size_t uniform = 0;
  std::optional<std::size_t> k;
  bool exact_rank = false;

  void attach(CLI::App* app) {
    auto* g = app->add_option("--graph", graph, "graph file (ground set = edges)");
    auto* d = app->add_option("--dpp", dpp, "matrix file holding a PSD DPP kernel");
    auto* l = app->add_option("--linear", linear, "matrix file for a linear matroid");
    auto* e = app->add_option("--explicit", explicit_table, "explicit density file");
    auto* u = app->add_option("--uniform", uniform, "uniform matroid U(n, k) on n elements");
    for (CLI::Option* a : {g, d, l, e, u}) {
      for (CLI::Option* b : {g, d, l, e, u}) {
        if (a != b) a->excludes(b);
      }
    }
    app->add_option("-k", k, "subset size (defaults to the rank for graphs and matrices)");
    app->add_flag("--exact-rank", exact_rank, "rational arithmetic for --linear");
  }

  bool given() const {
    return !graph.empty() || !dpp.empty() || !linear.empty() || !explicit_table.empty() ||
           uniform > 0;
  }

  std::shared_ptr<const LogDensityOracle> load() const {
    if (!graph.empty()) {
      Graph g = read_file(graph, [](std::istream& in, const std::string& s) { return read_graph(in, s); });
      const std::size_t kk = k ? *k : graphic_rank(g);
      return std::make_shared<ForestDensity>(std::move(g), kk);
    }
    if (!dpp.empty()) {
      if (!k) throw InputError("--dpp needs -k");
      auto m = read_file(dpp, [](std::istream& in, const std::string& s) { return read_matrix(in, s); });
      return std::make_shared<DppDensity>(std::move(m), *k);
    }
    if (!linear.empty()) {
      auto m = read_file(linear, [](std::istream& in, const std::string& s) { return read_matrix(in, s); });
      std::size_t kk = 0;
      if (k) {
        kk = *k;
      } else {
        DenseMatrix<double> copy = m;
        kk = eliminate_rank(copy);
      }
      return std::make_shared<LinearMatroidDensity>(
          std::move(m), kk,
          exact_rank ? LinearMatroidDensity::Arithmetic::kExactRational
                     : LinearMatroidDensity::Arithmetic::kFloating);
    }
    if (!explicit_table.empty()) {
      auto d = read_file(explicit_table,
                         [](std::istream& in, const std::string& s) { return read_explicit(in, s); });
      if (k && *k != d->k()) throw InputError("-k does not match the explicit file");
      return std::shared_ptr<const LogDensityOracle>(std::move(d));
    }
    if (uniform > 0) {
      if (!k) throw InputError("--uniform needs -k");
      return std::make_shared<UniformDensity>(uniform, *k);
    }
    throw InputError("no input given; use --graph, --dpp, --linear, --explicit or --uniform");
  }
};

inline void print_subset(std::ostream& out, std::span<const Element> s) {
  for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
  out << '\n';
}

struct PresetOptions {
  std::string preset = "practical";

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "practical or faithful constants")
        ->check(CLI::IsMember({"practical", "faithful"}));
  }

  PipelineConfig pipeline(std::size_t k, std::size_t threads) const {
    PipelineConfig c = preset == "faithful" ? PipelineConfig::faithful() : PipelineConfig::practical(k);
    c.threads = threads;
    return c;
  }

  CountConfig count(std::size_t k, std::size_t threads) const {
    CountConfig c = preset == "faithful" ? CountConfig::faithful() : CountConfig::practical(k);
    c.pipeline.threads = threads;
    return c;
  }
};

inline void echo_queries(std::ostream& out, std::uint64_t preprocess, std::uint64_t sampling) {
  out << "# queries preprocess " << preprocess << " per_sample_phase " << sampling << " total "
      << preprocess + sampling << '\n';
}

// Runs the command line `args` (without the program name). Results go to
// `out` (or --output), diagnostics and wall time to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Isotropy-accelerated sampling and counting over k-subsets"};
  app.name("isosample");
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed_opt;
  std::size_t threads = 1;
  std::string output;
  app.add_option("--seed", seed_opt, "random seed (drawn from the system and echoed if absent)");
  app.add_option("--threads", threads, "parallel chains; output is reproducible for a fixed value")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  app.add_option("--output", output, "write results to this file instead of stdout");

  // sample
  auto* sample = app.add_subcommand("sample", "draw approximate samples");
  InputOptions sample_in;
  sample_in.attach(sample);
  std::string mode = "isotropic";
  std::size_t count_n = 1;
  double epsilon = 0.1;
  double delta = 0.1;
  std::optional<std::size_t> t_opt, s_opt, l_opt, steps_opt;
  double step_constant = kDownUpStepConstant;
  std::string p_source = "pipeline";
  PresetOptions sample_preset;
  sample->add_option("--mode", mode, "downup or isotropic")->check(CLI::IsMember({"downup", "isotropic"}));
  sample->add_option("-n", count_n, "number of samples");
  sample->add_option("--epsilon", epsilon, "target total variation distance")->check(CLI::Range(0.0, 0.5));
  sample->add_option("--delta", delta, "failure probability of the marginal pipeline")->check(CLI::Range(0.0, 1.0));
  sample->add_option("--t", t_opt, "i.i.d. draws per outer step");
  sample->add_option("--s", s_opt, "inner down-up steps per outer step");
  sample->add_option("--l", l_opt, "outer steps per sample");
  sample->add_option("--steps", steps_opt, "down-up steps per sample");
  sample->add_option("--step-constant", step_constant, "c in ceil(c k ln(k / eps)) down-up steps");
  sample->add_option("--p", p_source, "sampling distribution: pipeline, exact or uniform")
      ->check(CLI::IsMember({"pipeline", "exact", "uniform"}));
  sample_preset.attach(sample);

  // count
  auto* count_cmd = app.add_subcommand("count", "estimate the partition function");
  InputOptions count_in;
  count_in.attach(count_cmd);
  double count_eps = 0.1;
  double count_delta = 0.1;
  bool crosscheck = false;
  PresetOptions count_preset;
  count_cmd->add_option("--epsilon", count_eps, "relative error")->check(CLI::Range(0.0, 1.0));
  count_cmd->add_option("--delta", count_delta, "failure probability")->check(CLI::Range(0.0, 1.0));
  count_cmd->add_flag("--exact-crosscheck", crosscheck, "compare with an exact count");
  count_preset.attach(count_cmd);

  // marginals
  auto* marg = app.add_subcommand("marginals", "build the sampling distribution p");
  InputOptions marg_in;
  marg_in.attach(marg);
  double marg_delta = 0.1;
  double marg_eps = 0.1;
  PresetOptions marg_preset;
  marg->add_option("--delta", marg_delta, "failure probability")->check(CLI::Range(0.0, 1.0));
  marg->add_option("--epsilon", marg_eps, "schedule accuracy target")->check(CLI::Range(0.0, 1.0));
  marg_preset.attach(marg);

  // verify
  auto* verify = app.add_subcommand("verify", "check inequalities and stationarity exactly");
  InputOptions verify_in;
  verify_in.attach(verify);
  SuiteOptions suite_opts;
  verify->add_option("--trials", suite_opts.tau_trials, "random (tau, p) and nu per instance");

  // bench
  auto* bench = app.add_subcommand("bench", "queries per isotropic sample across n for U(n, k)");
  std::vector<std::size_t> sizes{1000, 10000, 100000};
  std::size_t bench_k = 2;
  double bench_eps = 0.1;
  std::size_t bench_samples = 5;
  bench->add_option("--sizes", sizes, "ground set sizes")->delimiter(',');
  bench->add_option("-k", bench_k, "subset size");
  bench->add_option("--epsilon", bench_eps, "target total variation distance")->check(CLI::Range(0.0, 0.5));
  bench->add_option("--samples", bench_samples, "samples per size");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return 2;
  }

  std::ofstream file;
  if (!output.empty()) {
    file.open(output);
    if (!file) {
      err << "error: cannot open '" << output << "' for writing\n";
      return 1;
    }
  }
  std::ostream& os = output.empty() ? out : file;
  os << std::setprecision(10);
  const std::uint64_t seed = seed_opt ? *seed_opt : std::random_device{}() * 0x100000000ULL + std::random_device{}();
  Rng rng(seed);
  os << "# seed " << seed << '\n';

  try {
    const auto started = std::chrono::steady_clock::now();
    int status = 0;
    if (sample->parsed()) {
      if (!(epsilon > 0.0)) throw InputError("--epsilon must be positive");
      const auto mu = sample_in.load();
      const std::size_t k = mu->k();
      const SubsetState start = mu->support_point();
      std::uint64_t preprocess = mu->queries();
      if (mode == "downup") {
        const std::size_t steps = steps_opt ? *steps_opt : downup_default_steps(k, epsilon, step_constant);
        os << "# mode downup steps " << steps << '\n';
        const std::uint64_t before = mu->queries();
        for (std::size_t i = 0; i < count_n; ++i) {
          Rng chain = rng.split(i);
          print_subset(os, downup_sample(*mu, start, epsilon, chain, steps).elements());
        }
        echo_queries(os, preprocess, mu->queries() - before);
      } else {
        IsotropicConfig cfg = IsotropicConfig::defaults(k, epsilon);
        if (t_opt) cfg.t = *t_opt;
        if (s_opt) cfg.s = *s_opt;
        if (l_opt) cfg.l = *l_opt;
        cfg.validate(k);
        std::optional<SamplingDistribution> p;
        if (p_source == "uniform") {
          p = SamplingDistribution::uniform(mu->n());
        } else if (p_source == "exact") {
          const ExactTable table = enumerate(*mu);
          std::vector<double> q(table.marginals().begin(), table.marginals().end());
          p = SamplingDistribution::build(q, 1e-3 / static_cast<double>(mu->n()));
        } else {
          Rng pipeline_rng = rng.split(1u << 20);
          IsotropyOracle iso = build_isotropy_oracle(*mu, delta, pipeline_rng, epsilon,
                                                     sample_preset.pipeline(k, threads));
          p = iso.final_p();
        }
        preprocess = mu->queries();
        os << "# mode isotropic t " << cfg.t << " s " << cfg.s << " l " << cfg.l << " p " << p_source << '\n';
        std::vector<SubsetState> starts(threads, start);
        const SampleBatch batch = collect_isotropic_samples(*mu, *p, cfg, count_n, starts, false, rng);
        for (const SubsetState& s : batch.samples) print_subset(os, s.elements());
        echo_queries(os, preprocess, mu->queries() - preprocess);
        os << "# induced_queries " << batch.induced_queries << " bound_per_sample "
           << cfg.queries_per_sample() << '\n';
      }
    } else if (count_cmd->parsed()) {
      const auto mu = count_in.load();
      const CountEstimate est = count(*mu, count_eps, count_delta, rng, count_preset.count(mu->k(), threads));
      os << "preset " << count_preset.preset << '\n';
      os << "epsilon " << est.eps << '\n';
      os << "delta " << est.delta << '\n';
      os << "schedule_length " << est.schedule_length << '\n';
      os << "log_Z0 " << est.log_Z0 << '\n';
      os << "log_Z_hat " << est.log_Z_hat << '\n';
      if (est.log_Z_hat < 700.0) os << "Z_hat " << std::exp(est.log_Z_hat) << '\n';
      if (crosscheck) {
        double exact_log = 0.0;
        const auto* forest = dynamic_cast<const ForestDensity*>(mu.get());
        if (forest && forest->k() + 1 == forest->graph().num_vertices) {
          const Rational trees = exact_spanning_trees(forest->graph());
          exact_log = std::log(static_cast<double>(trees));
          os << "exact_Z " << trees << " matrix_tree\n";
        } else {
          exact_log = enumerate(*mu).log_partition();
          os << "exact_Z " << std::exp(exact_log) << " enumeration\n";
        }
        os << "relative_error " << std::abs(std::expm1(est.log_Z_hat - exact_log)) << '\n';
      }
      echo_queries(os, est.preprocess_queries, est.sampling_queries);
      os << "# induced_queries " << est.induced_queries << '\n';
    } else if (marg->parsed()) {
      const auto mu = marg_in.load();
      IsotropyOracle iso = build_isotropy_oracle(*mu, marg_delta, rng, marg_eps,
                                                 marg_preset.pipeline(mu->k(), threads));
      os << "anchor";
      for (Element e : iso.schedule.anchor) os << ' ' << e;
      os << '\n';
      os << "log_lambda0 " << iso.schedule.log_lambda0() << '\n';
      os << "ratio " << iso.schedule.ratio << '\n';
      os << "schedule_length " << iso.schedule.length() << '\n';
      os << "# i p(i) qhat(i)\n";
      const MarginalEstimate& last = iso.estimates.back();
      for (std::size_t i = 0; i < mu->n(); ++i) {
        os << i << ' ' << last.p.p(i) << ' ' << (last.qhat.empty() ? 0.0 : last.qhat[i]) << '\n';
      }
      echo_queries(os, iso.base_queries, 0);
      os << "# induced_queries " << iso.induced_queries << '\n';
    } else if (verify->parsed()) {
      SuiteReport report;
      std::vector<NamedDensity> families;
      if (verify_in.given()) {
        families.push_back({"input", verify_in.load()});
      } else {
        Rng family_rng = rng.split(0);
        families = builtin_families(family_rng);
      }
      suite_opts.nu_trials = suite_opts.tau_trials;
      Rng check_rng = rng.split(1);
      for (const auto& f : families) {
        const ExactTable table = enumerate(*f.density);
        run_inequality_checks(table, check_rng, suite_opts, report);
        run_stationarity_checks(*f.density, table, check_rng, report);
      }
      os << "# check instances max_violation\n";
      for (const auto& [name, r] : report) {
        os << name << ' ' << r.instances << ' ' << r.max_violation << '\n';
      }
      const bool ok = suite_passes(report);
      os << (ok ? "all checks hold\n" : "violations found\n");
      status = ok ? 0 : 1;
    } else if (bench->parsed()) {
      if (bench_k == 0) throw InputError("-k must be positive");
      const IsotropicConfig cfg = IsotropicConfig::defaults(bench_k, bench_eps);
      os << "# n k t s l samples induced_per_sample base_per_sample bound\n";
      for (std::size_t n : sizes) {
        const UniformDensity mu(n, bench_k);
        const SamplingDistribution p = SamplingDistribution::uniform(n);
        Rng local(seed);
        IsotropicSampler sampler(mu, p, cfg);
        SubsetState state = mu.support_point();
        const std::uint64_t q0 = mu.queries();
        for (std::size_t i = 0; i < bench_samples; ++i) state = sampler.sample(state, local);
        const double per = static_cast<double>(bench_samples);
        os << n << ' ' << bench_k << ' ' << cfg.t << ' ' << cfg.s << ' ' << cfg.l << ' ' << bench_samples
           << ' ' << static_cast<double>(sampler.induced_queries()) / per << ' '
           << static_cast<double>(mu.queries() - q0) / per << ' ' << cfg.queries_per_sample() << '\n';
      }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    err << "wall_seconds " << wall << '\n';
    return status;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace isosample::cli
