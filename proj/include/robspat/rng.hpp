#pragma once

// Reproducible random substreams. A stream is named by a master seed and a
// key derived from an experiment label plus a replication index, so every
// replication draws the same numbers no matter which worker runs it or in
// what order.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string_view>

namespace robspat {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms, unlike std::hash.
inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

using Engine = std::mt19937_64;

class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::string_view experiment, std::uint64_t replication = 0)
      : seed_(seed), key_(detail::splitmix64(detail::fnv1a(experiment) ^ detail::splitmix64(replication))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t key() const { return key_; }

  /// Independent child stream, e.g. `derive("perm", block)`.
  RngStream derive(std::string_view tag, std::uint64_t index = 0) const {
    RngStream child;
    child.seed_ = seed_;
    child.key_ = detail::splitmix64(key_ ^ detail::splitmix64(detail::fnv1a(tag) + index));
    return child;
  }

  Engine engine() const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)};
    return Engine(seq);
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t key_ = 0;
};

// The transforms below are written out rather than taken from <random> so
// draws are identical across standard library implementations.

/// Uniform on the open interval (0, 1).
inline double uniform01(Engine& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, bound), unbiased (Lemire).
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t bound) {
  using u128 = unsigned __int128;
  std::uint64_t x = eng();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = eng();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Standard normal via Box-Muller; one draw per call (the sine branch is dropped).
inline double standard_normal(Engine& eng) {
  const double u1 = uniform01(eng), u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Fisher-Yates shuffle with uniform_index.
template <typename T>
void shuffle(std::span<T> items, Engine& eng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(eng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace robspat
