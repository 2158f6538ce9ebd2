#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "isosample/density.hpp"
#include "isosample/graph.hpp"
#include "isosample/linear_algebra.hpp"
#include "isosample/subset.hpp"

namespace isosample {

// Whitespace-separated tokens with '#' comments stripped, tracking line
// numbers for error messages.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in, std::string source = "<input>")
      : in_(in), source_(std::move(source)) {}

  bool next(std::string& tok) {
    while (!(line_stream_ >> tok)) {
      std::string line;
      if (!std::getline(in_, line)) return false;
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line_stream_.clear();
      line_stream_.str(line);
    }
    return true;
  }

  std::string expect_word() {
    std::string tok;
    if (!next(tok)) fail("unexpected end of input");
    return tok;
  }

  std::uint64_t expect_count() {
    const std::string tok = expect_word();
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &used);
    } catch (const std::exception&) {
      fail("expected a nonnegative integer, got '" + tok + "'");
    }
    if (used != tok.size() || tok.front() == '-') fail("expected a nonnegative integer, got '" + tok + "'");
    return v;
  }

  double expect_number() {
    const std::string tok = expect_word();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("expected a number, got '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v)) fail("expected a finite number, got '" + tok + "'");
    return v;
  }

  void expect_header(const std::string& word) {
    const std::string tok = expect_word();
    if (tok != word) fail("expected header '" + word + "', got '" + tok + "'");
  }

  void expect_end() {
    std::string tok;
    if (next(tok)) fail("trailing data '" + tok + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::string source_;
  std::istringstream line_stream_;
  std::size_t line_no_ = 0;
};

// graph <num_vertices> <num_edges>, then one "u v" per edge.
inline Graph read_graph(std::istream& in, const std::string& source = "<input>") {
  TokenReader r(in, source);
  r.expect_header("graph");
  Graph g;
  g.num_vertices = r.expect_count();
  const std::uint64_t m = r.expect_count();
  g.edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    const std::uint64_t u = r.expect_count();
    const std::uint64_t v = r.expect_count();
    if (u >= g.num_vertices || v >= g.num_vertices) r.fail("edge endpoint out of range");
    g.edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  }
  r.expect_end();
  return g;
}

// matrix <rows> <cols>, then rows of decimal numbers.
inline DenseMatrix<double> read_matrix(std::istream& in, const std::string& source = "<input>") {
  TokenReader r(in, source);
  r.expect_header("matrix");
  const std::uint64_t rows = r.expect_count();
  const std::uint64_t cols = r.expect_count();
  DenseMatrix<double> m(rows, cols);
  for (std::uint64_t i = 0; i < rows * cols; ++i) m.data[i] = r.expect_number();
  r.expect_end();
  return m;
}

// explicit <n> <k>, then lines "i1 ... ik weight".
inline std::unique_ptr<ExplicitDensity> read_explicit(std::istream& in,
                                                      const std::string& source = "<input>") {
  TokenReader r(in, source);
  r.expect_header("explicit");
  const std::uint64_t n = r.expect_count();
  const std::uint64_t k = r.expect_count();
  std::vector<std::pair<SubsetState, double>> entries;
  std::string tok;
  while (r.next(tok)) {
    std::vector<Element> s;
    s.reserve(k);
    for (std::uint64_t j = 0; j < k; ++j) {
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(tok, &used);
      } catch (const std::exception&) {
        r.fail("expected an element index, got '" + tok + "'");
      }
      if (used != tok.size() || v >= n) r.fail("element index '" + tok + "' out of range");
      s.push_back(static_cast<Element>(v));
      tok = r.expect_word();
    }
    std::size_t used = 0;
    double w = 0.0;
    try {
      w = std::stod(tok, &used);
    } catch (const std::exception&) {
      r.fail("expected a weight, got '" + tok + "'");
    }
    if (used != tok.size()) r.fail("expected a weight, got '" + tok + "'");
    entries.emplace_back(SubsetState(std::move(s)), w);
  }
  return std::make_unique<ExplicitDensity>(n, k, std::move(entries));
}

template <typename Reader>
auto read_file(const std::string& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return reader(in, path);
}

}  // namespace isosample
