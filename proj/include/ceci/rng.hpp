#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ceci {

// All randomness in the project flows through this wrapper. mt19937_64 raw
// output is fully specified by the standard; the distribution mappings below
// are our own so that identical seeds give identical streams on every
// platform (std::uniform_* distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n); n must be positive.
  uint64_t below(uint64_t n);

  // Inclusive integer range.
  long long range(long long lo, long long hi) {
    return lo + static_cast<long long>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn from nonnegative weights (need not be normalized).
  size_t weighted(const std::vector<double>& weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Stream derivation so per-graph work is deterministic regardless of how the
// corpus loop is organized.
uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0);

}  // namespace ceci
