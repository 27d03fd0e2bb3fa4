#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace stiq {

/// SplitMix64 finalizer. Used to derive child seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seedable, splittable random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms unspecified, and
/// every experiment must reproduce bit-for-bit across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (both variates are used).
  double normal();

  /// Uniform integer on [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// +1 or -1 with equal probability.
  int rademacher() { return (next_u64() >> 63) != 0 ? 1 : -1; }

  /// Child stream that depends only on this stream's seed and `stream`,
  /// never on how many values have been drawn.
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

template <class T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace stiq
