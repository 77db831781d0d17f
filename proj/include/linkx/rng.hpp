#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace linkx {

// All randomness in the project flows through this generator: graph
// generation, node splits, weight initialization, and minibatch sampling.
//
// Algorithm: xoshiro256++ seeded via splitmix64. Substreams are derived from
// a root seed by hashing a tag path with the splitmix64 finalizer, so every
// consumer gets an independent, reproducible stream:
//
//   Rng r = Rng::stream(root_seed, {stream::kWeightInit, grid_index});
//
// No facility from <random> is used for draws; distributions there are
// implementation-defined and would break bit-reproducibility across
// toolchains.

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t z) {
  std::uint64_t s = z;
  return splitmix64_next(s);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Well-known tags for substream derivation. Values are arbitrary but frozen;
// changing them changes every downstream random artifact.
namespace stream {
inline constexpr std::uint64_t kGraph = 0x01;
inline constexpr std::uint64_t kLabels = 0x02;
inline constexpr std::uint64_t kFeatures = 0x03;
inline constexpr std::uint64_t kSplit = 0x04;
inline constexpr std::uint64_t kWeightInit = 0x05;
inline constexpr std::uint64_t kMinibatch = 0x06;
inline constexpr std::uint64_t kTwoHopSample = 0x07;
}  // namespace stream

class Rng {
 public:
  Rng() : Rng(0) {}

  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64_next(sm);
  }

  // Derives an independent substream from a root seed and a tag path.
  static Rng stream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t x = detail::mix64(root);
    for (std::uint64_t tag : path) x = detail::mix64(x ^ tag);
    Rng r;
    std::uint64_t sm = x;
    for (auto& word : r.state_) word = detail::splitmix64_next(sm);
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased (Lemire's multiply-shift rejection).
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 == 0.0) u1 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), in ascending order.
  std::vector<std::int32_t> sample_without_replacement(std::int32_t n, std::int32_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::int32_t> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (std::int32_t i = 0; i < k; ++i) {
      std::size_t j = i + uniform_index(static_cast<std::uint64_t>(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace linkx
