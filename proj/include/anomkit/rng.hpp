#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace anomkit {

// splitmix64 finalizer. Derives independent, schedule-free seeds from a
// master seed and a stream index (tree index, ensemble member, grid slot).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// Deterministic RNG. mt19937_64 has a fully specified output sequence; the
// distributions are hand-rolled so streams do not depend on the standard
// library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // (lo, hi), strictly interior; rejection on the boundary
  double uniform_open(double lo, double hi) {
    for (;;) {
      double v = uniform(lo, hi);
      if (v > lo && v < hi) return v;
    }
  }

  // [0, n), unbiased enough via 128-bit multiply
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // standard normal, Box-Muller
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), partial Fisher-Yates
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 gen_;
};

}  // namespace anomkit
