#ifndef GRAMINFER_RNG_HPP
#define GRAMINFER_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace graminfer {

/// Seeded random source with hand-rolled draws so that run outputs are
/// reproducible across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n = 0 or 1 consumes no engine output.
  std::size_t below(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::size_t uniform_in(std::size_t lo, std::size_t hi) {
    return lo + below(hi - lo + 1);
  }

  /// Uniform real in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability p. p <= 0 and p >= 1 consume no engine output.
  bool coin(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return unit() < p;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t k = below(i);
      std::swap(v[i - 1], v[k]);
    }
  }

private:
  std::mt19937_64 engine_;
};

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed for a labelled sub-task (for example
/// one challenge of a batch run) so batch order does not matter.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view label) {
  return splitmix64(seed ^ fnv1a64(label));
}

} // namespace graminfer

#endif
