#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace ssdp {

// mt19937_64 output is pinned by the standard; the helpers below avoid
// <random> distributions, whose algorithms are implementation-defined, so
// every draw is reproducible across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Bernoulli draw on an integer-only path: p is quantized to 2^-53 steps.
  bool chance(double p) {
    const auto threshold = static_cast<std::uint64_t>(p * 0x1.0p53);
    return (engine_() >> 11) < threshold;
  }

  template <class T>
  const T& pick(std::span<const T> items) {
    return items[below(items.size())];
  }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ssdp
