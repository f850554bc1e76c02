#pragma once

#include <cmath>
#include <numbers>

#include "atomlab/grid.hpp"

namespace testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline atomlab::SampledField sample(const atomlab::Grid& g, double (*fn)(double)) {
  return atomlab::SampledField::from_function(g, [fn](const atomlab::Point& x) { return atomlab::cplx{fn(x[0]), 0.0}; });
}

inline double smooth_bump(double r) { return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

// Torus distance to 0 on the unit circle.
inline double tent(double x) { return std::min(x, 1.0 - x); }

inline double max_diff(const atomlab::SampledField& a, const atomlab::SampledField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace testing
