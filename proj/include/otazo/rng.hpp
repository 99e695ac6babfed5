// Counter-based deterministic random streams.
//
// Every random quantity in the library is a pure function of a 64-bit key and
// a draw index, so trajectories are bit-reproducible across runs, platforms,
// and thread schedules. Keys are derived by folding context words (seed,
// iteration, client id, ...) through the SplitMix64 finalizer.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace otazo {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t word) {
  return mix64(seed + kGolden * (word + 1));
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b) {
  return derive_key(derive_key(seed, a), b);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b, std::uint64_t c) {
  return derive_key(derive_key(seed, a, b), c);
}

// Stateless keyed stream: value i is mix64(key + (i+1)*golden). The small
// wrapper below just tracks the counter.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

  // Uniform on the open interval (0, 1): top 53 bits, offset by half an ulp
  // so 0 and 1 are unreachable (log() below stays finite).
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Each pair of uniforms yields two
  // deviates; the second is cached so consecutive calls consume the stream
  // at one uniform per deviate on average.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi_v<double> * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = next_normal();
    return v;
  }

  // Fisher-Yates index permutation, used for data sharding and batching.
  std::uint64_t next_below(std::uint64_t bound) {
    // Bound is tiny (dataset sizes); modulo bias is < 2^-40 and irrelevant
    // for sampling, but rejection keeps the stream exactly uniform anyway.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace otazo
