#include "ceci/rng.hpp"

#include "ceci/text.hpp"

namespace ceci {

uint64_t Rng::below(uint64_t n) {
  if (n == 0) throw Error("Rng::below: n must be positive");
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

size_t Rng::weighted(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0) throw Error("Rng::weighted: negative weight");
    total += w;
  }
  if (total <= 0) throw Error("Rng::weighted: weights sum to zero");
  double r = uniform() * total;
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  return weights.size() - 1;
}

static uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b) {
  return splitmix64(splitmix64(base ^ splitmix64(a)) ^ splitmix64(b ^ 0x5bf03635ull));
}

}  // namespace ceci
