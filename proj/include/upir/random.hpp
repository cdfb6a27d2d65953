#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace upir {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// mt19937_64 with hand-rolled bounded/unit draws so that traces replay
/// byte-identically regardless of the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, n) without modulo bias.
  std::uint32_t below(std::uint32_t n) {
    const std::uint64_t threshold = (UINT64_MAX / n) * n;
    std::uint64_t x = engine_();
    while (x >= threshold) x = engine_();
    return static_cast<std::uint32_t>(x % n);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = below(static_cast<std::uint32_t>(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives the seed of the index-th stream from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master;
  std::uint64_t out = detail::splitmix64(state);
  state = master ^ (0x632be59bd9b4e019ull * (index + 1));
  out ^= detail::splitmix64(state);
  return out;
}

}  // namespace upir
