#include <doctest.h>

#include <random>

#include "atomlab/error.hpp"
#include "atomlab/fft.hpp"
#include "atomlab/spectral.hpp"
#include "helpers.hpp"

using namespace atomlab;
using testing::kTwoPi;

namespace {

SampledField plane_wave(const Grid& g, int k) {
  return SampledField::from_function(g, [k](const Point& x) { return std::polar(1.0, kTwoPi * k * x[0]); });
}

}  // namespace

TEST_CASE("resolution profile") {
  for (auto kind : {ResolutionKind::standard, ResolutionKind::perturbed}) {
    CHECK(resolution_profile(0.0, kind) == 1.0);
    CHECK(resolution_profile(1.0, kind) == 1.0);
    CHECK(resolution_profile(2.0, kind) == 0.0);
    CHECK(resolution_profile(3.0, kind) == 0.0);
    double prev = 1.0;
    for (double t = 1.0; t <= 2.0; t += 0.01) {
      const double v = resolution_profile(t, kind);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
  CHECK(resolution_profile(1.5, ResolutionKind::standard) != resolution_profile(1.5, ResolutionKind::perturbed));
}

TEST_CASE("blocks form a resolution of unity") {
  std::mt19937_64 rng(2);
  for (int n : {1, 2}) {
    const Grid g = make_grid(n, n == 1 ? 10 : 7);
    for (auto kind : {ResolutionKind::standard, ResolutionKind::perturbed}) {
      const ResolutionOfUnity res(g, kind);
      CHECK(res.multiplier(0, 0.0) == 1.0);
      for (int t = 0; t < 100; ++t) {
        const std::size_t i = rng() % g.size();
        double sum = 0.0;
        for (int j = 0; j <= res.j_max(); ++j) sum += res.block(j)[i];
        CHECK(std::abs(sum - 1.0) < 1e-14);
      }
      for (double xi : {0.0, 0.5, 1.0, 1.1, 3.9, 4.0, 7.0}) CHECK(res.multiplier(1, xi) >= 0.0);
      CHECK(res.multiplier(1, 0.5) == 0.0);
      CHECK(res.multiplier(1, 1.0) == 0.0);
      CHECK(res.multiplier(1, 4.0) == 0.0);
      CHECK(res.multiplier(1, 5.0) == 0.0);
      CHECK(res.multiplier(1, 2.0) > 0.0);
    }
  }
}

TEST_CASE("band projections") {
  const Grid g = make_grid(1, 10);
  const ResolutionOfUnity res(g, ResolutionKind::standard);
  const auto c = SampledField::from_function(g, [](const Point&) { return cplx{2.0, 1.0}; });
  CHECK(testing::max_diff(band_project(c, 0, res), c) < 1e-14);
  for (int j = 2; j <= res.j_max(); ++j) CHECK(band_project(c, j, res).max_abs() < 1e-14);

  const auto w = plane_wave(g, 8);
  const auto bands = band_decomposition(w, res);
  SampledField sum(g);
  for (int j = 0; j <= res.j_max(); ++j) {
    const bool allowed = std::ldexp(1.0, j - 1) <= 8.0 && 8.0 <= std::ldexp(1.0, j + 1);
    if (!allowed) CHECK(bands[j].max_abs() < 1e-13);
    CHECK(testing::max_diff(bands[j], band_project(w, j, res)) < 1e-13);
    sum = sum + bands[j];
  }
  CHECK(testing::max_diff(sum, w) < 1e-12);
}

TEST_CASE("almost orthogonality of the bands") {
  const Grid g = make_grid(1, 10);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (auto kind : {ResolutionKind::standard, ResolutionKind::perturbed}) {
    const ResolutionOfUnity res(g, kind);
    for (int t = 0; t < 10; ++t) {
      SampledField f(g);
      for (auto& v : f.values) v = cplx{nd(rng), nd(rng)};
      double bands = 0.0;
      for (const auto& b : band_decomposition(f, res)) bands += std::pow(lp_norm(b, 2.0), 2);
      const double ratio = bands / std::pow(lp_norm(f, 2.0), 2);
      CHECK(ratio >= 1.0 / 3.0);
      CHECK(ratio <= 3.0);
    }
  }
}

TEST_CASE("Fourier-side Besov norm") {
  const Grid g = make_grid(1, 10);
  const ResolutionOfUnity res(g, ResolutionKind::standard);
  const SpaceParams sp{0.5, 2, 2, 1};
  CHECK(besov_norm_fourier(SampledField(g), sp, res) == 0.0);
  const auto c = SampledField::from_function(g, [](const Point&) { return cplx{-3.0, 0.0}; });
  CHECK(besov_norm_fourier(c, sp, res) == doctest::Approx(3.0).epsilon(1e-14));

  // Oracle: the block multipliers evaluated at frequency 8.
  double oracle = 0.0;
  int jstar = 0;
  double best = 0.0;
  for (int j = 0; j <= res.j_max(); ++j) {
    const double m = res.multiplier(j, 8.0);
    oracle += std::ldexp(1.0, j) * m * m;
    if (m > best) best = m, jstar = j;
  }
  const double value = besov_norm_fourier(plane_wave(g, 8), sp, res);
  CHECK(value == doctest::Approx(std::sqrt(oracle)).epsilon(1e-12));
  CHECK(value >= std::pow(2.0, (jstar - 1) * 0.5));
  CHECK(value <= std::pow(2.0, (jstar + 1) * 0.5));
}

TEST_CASE("Fourier-side Triebel-Lizorkin norm") {
  const Grid g = make_grid(1, 10);
  const ResolutionOfUnity res(g, ResolutionKind::perturbed);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  SampledField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = nd(rng);
  CHECK(tl_norm_fourier(SampledField(g), SpaceParams{0.5, 2, 1, 1}, res) == 0.0);
  const auto c = SampledField::from_function(g, [](const Point&) { return cplx{0.0, 1.5}; });
  CHECK(tl_norm_fourier(c, SpaceParams{1.2, 3, 0.5, 1}, res) == doctest::Approx(1.5).epsilon(1e-14));
  for (double p : {0.7, 1.0, 2.0, 3.0}) {
    const SpaceParams sp{0.4, p, p, 1};
    const double b = besov_norm_fourier(f, sp, res);
    CHECK(std::abs(tl_norm_fourier(f, sp, res) - b) < 1e-12 * b);
  }
  CHECK_THROWS_AS(tl_norm_fourier(f, SpaceParams{0.5, kInf, 2, 1}, res), BoundsError);
}

TEST_CASE("Fourier norms are invariant under grid translations") {
  const Grid g = make_grid(2, 6);
  const ResolutionOfUnity res(g, ResolutionKind::standard);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  SampledField f(g);
  for (auto& v : f.values) v = nd(rng);
  SampledField t(g);
  for (std::size_t i = 0; i < g.size(); ++i) t.values[g.shifted(i, 5, -9)] = f.values[i];
  const SpaceParams sp{0.7, 1.5, 3, 2};
  CHECK(besov_norm_fourier(t, sp, res) == doctest::Approx(besov_norm_fourier(f, sp, res)).epsilon(1e-12));
  CHECK(tl_norm_fourier(t, sp, res) == doctest::Approx(tl_norm_fourier(f, sp, res)).epsilon(1e-12));
}

TEST_CASE("Besov norms are nondecreasing in s and nonincreasing in q") {
  const Grid g = make_grid(1, 9);
  const ResolutionOfUnity res(g, ResolutionKind::standard);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  SampledField f(g);
  for (auto& v : f.values) v = nd(rng);
  double prev = 0.0;
  for (double s : {-0.5, 0.0, 0.5, 1.0}) {
    const double b = besov_norm_fourier(f, SpaceParams{s, 2, 2, 1}, res);
    CHECK(b >= prev);
    prev = b;
  }
  prev = kInf;
  for (double q : {0.5, 1.0, 2.0, kInf}) {
    const double b = besov_norm_fourier(f, SpaceParams{0.3, 2, q, 1}, res);
    CHECK(b <= prev * (1 + 1e-14));
    prev = b;
  }
}
