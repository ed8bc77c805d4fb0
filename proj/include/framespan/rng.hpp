#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "framespan/error.hpp"

namespace framespan {

// Deterministic random source. The mt19937_64 engine is fully specified by
// the standard, so two builds on any platform produce the same stream; the
// distributions below are hand-rolled because the std:: distribution objects
// are implementation-defined and would break bit-for-bit reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform double in [0, 1), 53 bits of entropy.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased: the
  // accepted range [threshold, 2^64) has size divisible by n.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw error("Rng::below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    std::uint64_t x = next_u64();
    while (x < threshold) x = next_u64();
    return x % n;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t k = v.size(); k > 1; --k) {
      size_t j = static_cast<size_t>(below(k));
      std::swap(v[k - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace framespan
