#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "isosample/linear_algebra.hpp"
#include "isosample/subset.hpp"

namespace isosample {

struct Graph {
  std::size_t num_vertices = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // ground set = edge order
};

// Union-find with path halving; reset() reuses the allocation.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n = 0) { reset(n); }

  void reset(std::size_t n) {
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // False when a and b were already connected.
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

inline Graph complete_graph(std::size_t v) {
  Graph g{v, {}};
  for (std::uint32_t a = 0; a < v; ++a) {
    for (std::uint32_t b = a + 1; b < v; ++b) g.edges.emplace_back(a, b);
  }
  return g;
}

inline Graph path_graph(std::size_t v) {
  Graph g{v, {}};
  for (std::uint32_t a = 0; a + 1 < v; ++a) g.edges.emplace_back(a, a + 1);
  return g;
}

inline Graph cycle_graph(std::size_t v) {
  Graph g = path_graph(v);
  if (v > 2) g.edges.emplace_back(static_cast<std::uint32_t>(v - 1), 0u);
  return g;
}

inline Graph petersen_graph() {
  Graph g{10, {}};
  for (std::uint32_t i = 0; i < 5; ++i) {
    g.edges.emplace_back(i, (i + 1) % 5);          // outer cycle
    g.edges.emplace_back(i, i + 5);                // spokes
    g.edges.emplace_back(i + 5, (i + 2) % 5 + 5);  // inner pentagram
  }
  return g;
}

// Rank of the graphic matroid: |V| minus the number of connected components.
inline std::size_t graphic_rank(const Graph& g) {
  DisjointSets sets(g.num_vertices);
  std::size_t rank = 0;
  for (auto [a, b] : g.edges) rank += sets.unite(a, b) ? 1 : 0;
  return rank;
}

// Number of spanning trees via the matrix-tree theorem: any cofactor of the
// graph Laplacian, computed exactly. Self-loops are ignored; parallel edges count.
inline Rational spanning_tree_count(const Graph& g) {
  const std::size_t v = g.num_vertices;
  if (v <= 1) return 1;
  DenseMatrix<Rational> lap(v - 1, v - 1);
  for (auto [a, b] : g.edges) {
    if (a == b) continue;
    if (a + 1 < v) lap(a, a) += 1;
    if (b + 1 < v) lap(b, b) += 1;
    if (a + 1 < v && b + 1 < v) {
      lap(a, b) -= 1;
      lap(b, a) -= 1;
    }
  }
  return exact_determinant(std::move(lap));
}

}  // namespace isosample
