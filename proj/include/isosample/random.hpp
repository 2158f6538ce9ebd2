#pragma once

#include <concepts>
#include <cstdint>
#include <random>

namespace isosample {

// Anything the samplers can draw from: a uniform index below a bound and a
// uniform double in [0, 1).
template <typename R>
concept RandomSource = requires(R& r, std::uint64_t bound) {
  { r.uniform_index(bound) } -> std::convertible_to<std::uint64_t>;
  { r.uniform01() } -> std::convertible_to<double>;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seeded 64-bit Mersenne twister with stream splitting. Every sampler takes one
// of these explicitly; split(i) derives an independent, reproducible child
// stream so parallel chains never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng split(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound) without modulo bias (Lemire's multiply-shift with
  // rejection).
  std::uint64_t uniform_index(std::uint64_t bound) {
    std::uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = engine_();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

static_assert(RandomSource<Rng>);

}  // namespace isosample
