#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>

namespace isosample {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// log(sum_i exp(x_i)) with a max shift. Returns -inf for an empty range or
// when every term is -inf.
inline double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  if (hi == kPosInf) return kPosInf;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return kNegInf;
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Exact binomial coefficient; throws when the result does not fit in 64 bits.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // result * num / i is always integral; divide by gcd first to delay overflow.
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t r = result / g;
    const std::uint64_t d = i / g;
    if (num / d > std::numeric_limits<std::uint64_t>::max() / r) {
      throw std::overflow_error("binomial(" + std::to_string(n) + ", " +
                                std::to_string(k) + ") overflows 64 bits");
    }
    result = r * (num / d);
  }
  return result;
}

// A large nonnegative count held in a double, printed without exponent.
inline std::string format_whole(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.0f", v);
  return buf;
}

}  // namespace isosample
