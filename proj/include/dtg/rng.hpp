#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace dtg {

// splitmix64 finalizer, used for seed derivation.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(mix64(a) ^ b); }

inline uint64_t mix64(uint64_t a, uint64_t b, uint64_t c) {
  return mix64(mix64(a, b) ^ c);
}

inline uint64_t hash_str(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic RNG. All distributions are hand-rolled on top of mt19937_64 so
// streams are reproducible independent of the standard library version.
class Rng {
public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(mix64(seed)) {}

  uint64_t u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive integer range via rejection (unbiased)
  int64_t range_int(int64_t lo, int64_t hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % span);
    uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return lo + static_cast<int64_t>(v % span);
  }

  // standard normal, Box-Muller with one cached value
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    cache_ = r * std::sin(2.0 * M_PI * u2);
    has_cache_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  // derived stream; independent of how much this one has been consumed
  Rng child(std::string_view tag, uint64_t index = 0) const {
    return Rng(mix64(seed_, hash_str(tag), index));
  }

  uint64_t seed() const { return seed_; }

private:
  uint64_t seed_;
  std::mt19937_64 gen_;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace dtg
