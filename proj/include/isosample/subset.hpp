#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isosample {

using Element = std::uint32_t;

// Malformed caller input (bad subset, bad file, bad parameter). Distinct from
// a zero density, which is reported as -inf.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

[[noreturn, gnu::cold, gnu::noinline]] inline void reject_subset(std::span<const Element> s,
                                                                 std::size_t n, std::size_t k) {
  if (s.size() != k) {
    throw InputError("subset has " + std::to_string(s.size()) +
                     " elements, expected " + std::to_string(k));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= n) {
      throw InputError("element " + std::to_string(s[i]) +
                       " outside ground set of size " + std::to_string(n));
    }
  }
  throw InputError("subset elements must be strictly increasing");
}

}  // namespace detail

inline void check_subset(std::span<const Element> s, std::size_t n, std::size_t k) {
  bool ok = s.size() == k;
  for (std::size_t i = 0; ok && i < s.size(); ++i) {
    ok = s[i] < n && (i == 0 || s[i - 1] < s[i]);
  }
  if (!ok) detail::reject_subset(s, n, k);
}

// A k-subset of the ground set [0, n), stored sorted.
class SubsetState {
 public:
  SubsetState() = default;

  // Takes any order; rejects duplicates.
  explicit SubsetState(std::vector<Element> elements) : elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end());
    if (std::adjacent_find(elements_.begin(), elements_.end()) != elements_.end()) {
      throw InputError("subset contains a repeated element");
    }
  }
  SubsetState(std::initializer_list<Element> elements)
      : SubsetState(std::vector<Element>(elements)) {}

  std::span<const Element> elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  Element operator[](std::size_t i) const { return elements_[i]; }
  auto begin() const { return elements_.begin(); }
  auto end() const { return elements_.end(); }

  bool contains(Element e) const {
    return std::binary_search(elements_.begin(), elements_.end(), e);
  }

  auto operator<=>(const SubsetState&) const = default;

 private:
  std::vector<Element> elements_;
};

inline std::ostream& operator<<(std::ostream& os, const SubsetState& s) {
  os << '{';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  return os << '}';
}

// |a ∩ b| for two sorted ranges.
inline std::size_t intersection_size(std::span<const Element> a, std::span<const Element> b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

}  // namespace isosample
