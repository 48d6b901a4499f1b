#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dicnet {

/// Seeded pseudo-random source.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard.
/// The standard library distributions are implementation-defined, so the
/// conversions to uniform reals, normals and bounded integers live here to
/// keep every seeded result identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, one value per call).
  double normal();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Random permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent seed for a named sub-stream (SplitMix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Round half up, used by every quota computation.
std::size_t round_half_up(double x);

}  // namespace dicnet
