#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <stdexcept>
#include <vector>

#include "isosample/isosample.hpp"

namespace isosample::testing {

// Replays a fixed list of index draws; uniform01 draws are served from a
// separate list. Throws once a list runs out.
class ScriptedRng {
 public:
  ScriptedRng(std::vector<std::uint64_t> indices, std::vector<double> reals = {})
      : indices_(indices.begin(), indices.end()), reals_(reals.begin(), reals.end()) {}

  std::uint64_t uniform_index(std::uint64_t bound) {
    if (indices_.empty()) throw std::out_of_range("script exhausted");
    const std::uint64_t v = indices_.front();
    indices_.pop_front();
    if (v >= bound) throw std::out_of_range("scripted index out of bound");
    return v;
  }

  double uniform01() {
    if (reals_.empty()) throw std::out_of_range("script exhausted");
    const double v = reals_.front();
    reals_.pop_front();
    return v;
  }

  bool exhausted() const { return indices_.empty() && reals_.empty(); }

 private:
  std::deque<std::uint64_t> indices_;
  std::deque<double> reals_;
};

inline std::unique_ptr<ExplicitDensity> explicit_uniform(std::size_t n, std::size_t k) {
  std::vector<std::pair<SubsetState, double>> entries;
  for_each_subset(n, k, [&](std::span<const Element> s) {
    entries.emplace_back(SubsetState(std::vector<Element>(s.begin(), s.end())), 1.0);
  });
  return std::make_unique<ExplicitDensity>(n, k, entries);
}

inline std::unique_ptr<ExplicitDensity> point_mass_density(std::size_t n, SubsetState t) {
  const std::size_t k = t.size();
  return std::make_unique<ExplicitDensity>(
      n, k, std::vector<std::pair<SubsetState, double>>{{std::move(t), 1.0}});
}

inline DenseMatrix<double> diagonal(std::vector<double> d) {
  DenseMatrix<double> m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

inline Graph triangle() { return complete_graph(3); }

}  // namespace isosample::testing
