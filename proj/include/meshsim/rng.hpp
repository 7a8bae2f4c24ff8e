#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace meshsim {

/// Deterministic random source. mt19937_64 is bit-exact across standard
/// library implementations; the uniform and normal transforms below are
/// written out explicitly because std::uniform_real_distribution and
/// std::normal_distribution are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; draws come in cached pairs.
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double gauss(double mean, double sd) { return mean + sd * gauss(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// splitmix64 finalizer (public-domain construction by Sebastiano Vigna).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives the seed of sub-stream `stream` from a master seed. Documented
/// split rule: splitmix64(splitmix64(master) + stream). Every parallel
/// trial, scan, or measurement seeds its own Rng through this function, so
/// results are independent of execution order and thread count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) + stream);
}

/// Normal sample constrained to [lo, hi] by rejection; falls back to the
/// clamped mean if 1000 draws miss, which keeps the call total.
inline double truncated_gauss(Rng& rng, double mean, double sd, double lo,
                              double hi) {
  if (sd == 0.0) return std::clamp(mean, lo, hi);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.gauss(mean, sd);
    if (v >= lo && v <= hi) return v;
  }
  return std::clamp(mean, lo, hi);
}

}  // namespace meshsim
