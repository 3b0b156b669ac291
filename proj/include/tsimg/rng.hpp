#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace tsimg {

/// Seeded generator with platform-independent draws.
///
/// The standard distributions are implementation-defined, so uniform, normal
/// and shuffle draws are derived directly from the mt19937_64 bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal(double mean = 0.0, double stddev = 1.0);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seed for an independent sub-run (sweep cell, worker).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace tsimg
