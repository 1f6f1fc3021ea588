#ifndef FDS_UTIL_HPP
#define FDS_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace fds {

// Numerically stable logistic function.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Sigmoid clamped into the open unit interval. Truth probabilities must
// never be exactly 0 or 1 for finite parameters, but the plain logistic
// saturates in double precision around |x| > 37.
inline double truth_sigmoid(double x) {
  double p = sigmoid(x);
  const double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  if (p < lo) return lo;
  if (p > hi) return hi;
  return p;
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Deterministic 64-bit generator (splitmix64). Used instead of <random>
// distributions because those are implementation-defined and the corpus
// generator and projection hashing are contractually bit-reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 bits of entropy.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Fixed-point multiply keeps this portable.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Seeded FNV-1a with a splitmix finalizer. Stable across platforms.
inline std::uint64_t stable_hash64(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ (seed + 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace fds

#endif  // FDS_UTIL_HPP
