#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace dstoch {

// splitmix64 finalizer (Steele, Lea, Flood; public domain).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Identifies one gradient draw: the stream for (replicate, node, iteration)
// is a pure function of these coordinates and the master seed, so replicates
// can run in any order (or concurrently) and still reproduce bit-exactly.
struct StreamCoords {
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
  std::uint64_t iteration = 0;
};

// Counter-based stream: a 64-bit key absorbed from the coordinates, then a
// running counter pushed through splitmix64. Stateless across draws with
// different coordinates.
class CounterRng {
 public:
  CounterRng(const StreamCoords& c, std::uint64_t node) {
    std::uint64_t k = splitmix64(c.seed);
    k = splitmix64(k ^ c.replicate);
    k = splitmix64(k ^ node);
    k = splitmix64(k ^ c.iteration);
    key_ = k;
  }

  std::uint64_t next_u64() { return splitmix64(key_ ^ counter_++); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; avoids std::normal_distribution so the
  // stream is identical across standard-library implementations
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // m distinct indices from {0,...,n-1}, partial Fisher-Yates
  void sample_without_replacement(int n, int m, std::vector<int>& out) {
    scratch_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) scratch_[static_cast<std::size_t>(i)] = i;
    out.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const int j = i + static_cast<int>(next_u64() % static_cast<std::uint64_t>(n - i));
      std::swap(scratch_[static_cast<std::size_t>(i)], scratch_[static_cast<std::size_t>(j)]);
      out[static_cast<std::size_t>(i)] = scratch_[static_cast<std::size_t>(i)];
    }
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
  std::vector<int> scratch_;
};

}  // namespace dstoch
