#pragma once

#include <cstdint>
#include <vector>

namespace logptr {

// SplitMix64. All randomness in the toolkit (splits, shuffles, weight init,
// dropout) flows through this generator so that a fixed seed reproduces a
// run bit-for-bit on a fixed platform.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  uint64_t state_;
};

// In-place Fisher-Yates, high to low, j = rng % (i + 1).
template <typename T>
void fisher_yates(std::vector<T>& items, SplitMix64& rng) {
  if (items.size() < 2) return;
  for (size_t i = items.size() - 1; i > 0; --i) {
    size_t j = static_cast<size_t>(rng.next_below(i + 1));
    std::swap(items[i], items[j]);
  }
}

}  // namespace logptr
