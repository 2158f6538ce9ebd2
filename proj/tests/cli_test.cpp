#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

const std::string kFixtures = FIXTURE_DIR;
const std::string kData = TEST_DATA_DIR;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = isosample::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::vector<std::vector<int>> subset_lines(const std::string& text) {
  std::vector<std::vector<int>> sets;
  for (const std::string& line : lines(text)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    std::vector<int> s;
    for (int x; in >> x;) s.push_back(x);
    sets.push_back(s);
  }
  return sets;
}

}  // namespace

TEST(Cli, ParseErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"sample", "--uniform", "6", "-k", "2", "--mode", "gibbs"}).code, 2);
  EXPECT_EQ(run({"sample", "--uniform", "6", "--graph", "x"}).code, 2);
  const Result r = run({"sample", "--epsilon", "0.9"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, HelpExitsZero) {
  const Result r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("sample"), std::string::npos);
}

TEST(Cli, RuntimeErrorsExitOne) {
  Result r = run({"--seed", "1", "sample", "--graph", kFixtures + "/missing.graph"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
  r = run({"--seed", "1", "sample", "--dpp", kFixtures + "/dpp5.matrix"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("-k"), std::string::npos);
}

TEST(Cli, DownUpSampleFormatAndDeterminism) {
  const std::vector<std::string> args = {"--seed", "42", "sample", "--graph", kFixtures + "/k4.graph",
                                         "--mode", "downup", "-n", "25", "--epsilon", "0.1"};
  const Result a = run(args);
  const Result b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out).front(), "# seed 42");
  const auto sets = subset_lines(a.out);
  ASSERT_EQ(sets.size(), 25u);
  for (const auto& s : sets) {
    ASSERT_EQ(s.size(), 3u);
    EXPECT_LT(s[0], s[1]);
    EXPECT_LT(s[1], s[2]);
    EXPECT_LT(s[2], 6);
  }
  const Result c = run({"--seed", "43", "sample", "--graph", kFixtures + "/k4.graph", "--mode", "downup",
                        "-n", "25", "--epsilon", "0.1"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, IsotropicSampleEchoesQueries) {
  const Result r = run({"--seed", "5", "sample", "--uniform", "8", "-k", "2", "-n", "4", "--p", "uniform",
                        "--t", "4", "--s", "3", "--l", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# mode isotropic t 4 s 3 l 2 p uniform"), std::string::npos);
  EXPECT_NE(r.out.find("# induced_queries 120 bound_per_sample 30"), std::string::npos);
  EXPECT_EQ(subset_lines(r.out).size(), 4u);
}

TEST(Cli, PipelineSampleIsReproducible) {
  const std::vector<std::string> args = {"--seed", "9", "sample", "--graph", kFixtures + "/k4.graph",
                                         "-n", "3", "--t", "6", "--s", "4", "--l", "1"};
  const Result a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, run(args).out);
  EXPECT_EQ(subset_lines(a.out).size(), 3u);
}

TEST(Cli, OutputFile) {
  const std::string path = ::testing::TempDir() + "cli_test_out.txt";
  const Result r = run({"--seed", "3", "--output", path, "sample", "--uniform", "5", "-k", "2", "--mode",
                        "downup", "-n", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(subset_lines(buf.str()).size(), 2u);
  std::remove(path.c_str());
}

TEST(Cli, VerifyFixturesPass) {
  const std::vector<std::vector<std::string>> inputs = {
      {"--graph", kFixtures + "/k4.graph"},
      {"--graph", kFixtures + "/k5.graph"},
      {"--graph", kFixtures + "/petersen.graph", "-k", "3"},
      {"--dpp", kFixtures + "/dpp5.matrix", "-k", "2"},
      {"--linear", kFixtures + "/fano.matrix"},
      {"--linear", kFixtures + "/fano.matrix", "--exact-rank"},
      {"--explicit", kFixtures + "/u42.explicit"},
  };
  for (const auto& in : inputs) {
    std::vector<std::string> args = {"--seed", "1", "verify"};
    args.insert(args.end(), in.begin(), in.end());
    const Result r = run(args);
    EXPECT_EQ(r.code, 0) << in[1] << "\n" << r.out << r.err;
    EXPECT_NE(r.out.find("all checks hold"), std::string::npos);
  }
}

TEST(Cli, VerifyBuiltinFamilies) {
  const Result r = run({"--seed", "2", "verify", "--trials", "5"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  for (const char* check : {"point_negcorr", "downup_stationarity", "outer_stationarity"}) {
    EXPECT_NE(r.out.find(check), std::string::npos) << check;
  }
}

TEST(Cli, VerifyWitnessFails) {
  const Result r = run({"--seed", "1", "verify", "--explicit", kData + "/correlated.explicit"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("violations found"), std::string::npos);
}

TEST(Cli, BenchPerSampleCostIndependentOfN) {
  const Result r = run({"--seed", "4", "bench", "--sizes", "100,1000,100000", "-k", "2", "--epsilon", "0.25",
                        "--samples", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> rows;
  for (const std::string& line : lines(r.out)) {
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  }
  ASSERT_EQ(rows.size(), 3u);
  std::vector<double> induced;
  for (const std::string& row : rows) {
    std::istringstream in(row);
    double n, k, t, s, l, samples, ind, base, bound;
    in >> n >> k >> t >> s >> l >> samples >> ind >> base >> bound;
    EXPECT_EQ(ind, bound);
    EXPECT_LE(base, bound);
    induced.push_back(ind);
  }
  EXPECT_EQ(induced[0], induced[1]);
  EXPECT_EQ(induced[1], induced[2]);
}

TEST(Cli, MarginalsTable) {
  const Result r = run({"--seed", "6", "marginals", "--graph", kFixtures + "/k4.graph"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = lines(r.out);
  EXPECT_NE(r.out.find("\nschedule_length "), std::string::npos);
  double total = 0.0;
  int rows = 0;
  bool table = false;
  for (const std::string& line : out) {
    if (line == "# i p(i) qhat(i)") {
      table = true;
      continue;
    }
    if (!table || line[0] == '#') continue;
    std::istringstream in(line);
    int i;
    double p, q;
    in >> i >> p >> q;
    EXPECT_EQ(i, rows++);
    EXPECT_GT(p, 0.0);
    total += p;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(Cli, CountWithCrosscheck) {
  const Result r = run({"--seed", "8", "count", "--graph", kFixtures + "/k4.graph", "--exact-crosscheck"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("preset practical\n"), std::string::npos);
  EXPECT_NE(r.out.find("exact_Z 16 matrix_tree\n"), std::string::npos);
  const auto pos = r.out.find("relative_error ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(r.out.substr(pos + 15)), 0.25);
}
