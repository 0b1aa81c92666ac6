#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace trauma {

// splitmix64 finalizer. Used wherever a derived seed is needed (per-study,
// per-slice, per-epoch) so parallel work stays order-insensitive.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Documented per-study seed derivation: mix of root seed and study index.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(root ^ splitmix64(index + 1));
}

// mt19937_64 is fully specified by the standard; the distributions below are
// hand-rolled because std::uniform_real_distribution and friends are
// implementation-defined and would break bit-reproducibility across stdlibs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] via rejection-free modulo of a 64-bit draw;
  // bias is negligible for the small ranges used here and, more importantly,
  // the result is identical everywhere.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(eng_() % span);
  }

  // Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Index rounding used for every nearest-index resampling step in the
// pipeline: round-half-away-from-zero, fixed across platforms. Inputs here
// are always >= 0.
inline std::int64_t round_index(double x) {
  return static_cast<std::int64_t>(std::floor(x + 0.5));
}

}  // namespace trauma
