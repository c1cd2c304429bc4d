#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace zzct {

// splitmix64 finalizer, used both to whiten seeds and to derive
// independent per-replicate streams from one base seed.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ (0x9E3779B97F4A7C15ull * (index + 1)));
}

// Wrapper around mt19937_64 with hand-rolled variate transforms so that
// streams are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  // uniform on (0, 1); never returns 0 so logs are safe
  double uniform() {
    const std::uint64_t bits = gen_() >> 11;  // 53 random bits
    double u = (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
    return u;
  }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  // Box-Muller; one spare kept between calls
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double rademacher() { return uniform() < 0.5 ? -1.0 : 1.0; }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace zzct
