#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "isosample/log_space.hpp"

namespace isosample {

using Rational = boost::multiprecision::cpp_rational;

template <typename T>
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;  // row-major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

  T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Relative pivot threshold for floating-point rank decisions.
inline constexpr double kPivotThreshold = 1e-10;

namespace detail {

inline bool is_zero_pivot(double value, double scale) {
  return std::abs(value) <= kPivotThreshold * scale;
}
inline bool is_zero_pivot(const Rational& value, const Rational&) { return value == 0; }

inline double magnitude(double v) { return std::abs(v); }
inline Rational magnitude(const Rational& v) { return v < 0 ? Rational(-v) : v; }

}  // namespace detail

// Rank of an r x c matrix (modified in place) by Gaussian elimination with
// partial pivoting. Floating point treats |pivot| <= 1e-10 * max|entry| as zero;
// rationals use the exact zero test.
template <typename T>
std::size_t eliminate_rank(DenseMatrix<T>& a) {
  T scale = T(0);
  for (const T& v : a.data) scale = std::max(scale, detail::magnitude(v));
  if (scale == T(0)) return 0;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < a.cols && rank < a.rows; ++col) {
    std::size_t pivot = rank;
    T best = detail::magnitude(a(rank, col));
    for (std::size_t i = rank + 1; i < a.rows; ++i) {
      T m = detail::magnitude(a(i, col));
      if (m > best) {
        best = m;
        pivot = i;
      }
    }
    if (detail::is_zero_pivot(a(pivot, col), scale)) continue;
    if (pivot != rank) {
      for (std::size_t j = 0; j < a.cols; ++j) std::swap(a(pivot, j), a(rank, j));
    }
    for (std::size_t i = rank + 1; i < a.rows; ++i) {
      if (a(i, col) == T(0)) continue;
      T factor = a(i, col) / a(rank, col);
      for (std::size_t j = col; j < a.cols; ++j) a(i, j) -= factor * a(rank, j);
    }
    ++rank;
  }
  return rank;
}

// Exact determinant of a square rational matrix.
inline Rational exact_determinant(DenseMatrix<Rational> a) {
  const std::size_t n = a.rows;
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a(pivot, col) == 0) ++pivot;
    if (pivot == n) return 0;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(pivot, j), a(col, j));
      det = -det;
    }
    det *= a(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      if (a(i, col) == 0) continue;
      Rational factor = a(i, col) / a(col, col);
      for (std::size_t j = col; j < n; ++j) a(i, j) -= factor * a(col, j);
    }
  }
  return det;
}

// Relative tolerance below which a Cholesky pivot counts as a vanishing minor.
inline constexpr double kCholeskyTolerance = 1e-12;

// log det of the principal submatrix of the symmetric matrix `full` (n x n,
// row-major) indexed by `idx`, via Cholesky. Returns -inf when a pivot falls
// below tolerance, which covers singular and (numerically) indefinite minors.
inline double log_det_principal(std::span<const double> full, std::size_t n,
                                std::span<const std::uint32_t> idx,
                                std::vector<double>& work) {
  const std::size_t m = idx.size();
  if (m == 0) return 0.0;
  work.assign(m * m, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) work[i * m + j] = full[idx[i] * n + idx[j]];
    scale = std::max(scale, std::abs(work[i * m + i]));
  }
  if (scale == 0.0) return kNegInf;
  double log_det = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double d = work[j * m + j];
    for (std::size_t p = 0; p < j; ++p) d -= work[j * m + p] * work[j * m + p];
    if (!(d > kCholeskyTolerance * scale)) return kNegInf;
    const double root = std::sqrt(d);
    work[j * m + j] = root;
    log_det += 2.0 * std::log(root);
    for (std::size_t i = j + 1; i < m; ++i) {
      double v = work[i * m + j];
      for (std::size_t p = 0; p < j; ++p) v -= work[i * m + p] * work[j * m + p];
      work[i * m + j] = v / root;
    }
  }
  return log_det;
}

}  // namespace isosample
