#pragma once

// Deterministic random numbers. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard. The std:: distributions are not
// portable, so the conversions below are spelled out:
//   uniform()  = (x >> 11) * 2^-53          in [0, 1)
//   normal()   = Box-Muller on two uniforms (cosine branch only)

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace atomlab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer in [lo, hi].
  long integer(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(engine_() % span);
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::complex<double> complex_normal() {
    const double re = normal();
    return {re, normal()};
  }

  /// Independent child stream; used to give every corpus member its own seed.
  Rng split() { return Rng(engine_() ^ 0x9e3779b97f4a7c15ULL); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace atomlab
