#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ihgen {

// Deterministic random stream. The raw engine is std::mt19937_64 but all
// floating-point draws are derived from raw 64-bit words with explicit
// arithmetic, so sequences are reproducible across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed), seed_base_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int lo, int hi_inclusive) {
    const auto span = static_cast<std::uint64_t>(hi_inclusive - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  // Box-Muller; one spare value cached.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return mean + stddev * r * std::cos(phi);
  }

  // Independent child stream; used to give each batch job its own
  // scheduling-independent sequence.
  RngStream split(std::uint64_t index) const {
    return RngStream(mix(seed_base_ ^ mix(index + 0x9e3779b97f4a7c15ull)));
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  std::uint64_t seed_base_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ihgen
