#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace recdp {

// splitmix64: advances `state` and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (master, a, b). Used to make
// per-cell and per-user randomness independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= b * 0xc2b2ae3d27d4eb4fULL;
  h ^= splitmix64(s);
  return h;
}

// Self-contained generator with fully specified output on every platform.
// std::uniform_int_distribution and friends are implementation-defined, which
// would break the byte-identical reproducibility contract, so bounded draws,
// shuffling and gaussians are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Unbiased draw in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform in [0, 1), 53 random bits.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Box-Muller with a cached spare deviate.
  double gaussian(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1;
    do {
      u1 = unit();
    } while (u1 <= 0.0);
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace recdp
