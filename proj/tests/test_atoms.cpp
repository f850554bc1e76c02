#include <doctest.h>

#include <random>

#include "atomlab/atoms.hpp"
#include "atomlab/error.hpp"
#include "helpers.hpp"

using namespace atomlab;
using testing::kTwoPi;

namespace {

// g(y) = bump(4 y), supported in |y| < 1/4.
double g_profile(double y) { return testing::smooth_bump(4.0 * y); }

AtomSpec scaled_bump_atom(const Grid& grid, int level, long m, const SpaceParams& sp) {
  const double side = std::ldexp(1.0, -level);
  const double amp = std::exp2(-level * (sp.s - sp.n / sp.p));
  SampledField f = SampledField::from_function(grid, [&](const Point& x) {
    return cplx{amp * g_profile(wrap_offset(x[0] - side * m, 1.0) / side), 0.0};
  });
  return AtomSpec{f, make_cube(level, {m, 0}, sp.d, 1), sp, nullptr};
}

double integral_of_g(int J) {
  return quadrature(SampledField::from_function(make_grid(1, J), [](const Point& x) {
           return cplx{g_profile(wrap_offset(x[0], 1.0)), 0.0};
         })).real();
}

cplx centered_moment(const AtomSpec& a, int r) {
  const Grid& g = a.field.grid;
  const double c = cube_geometry(a.cube, g).center[0];
  cplx s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += std::pow(wrap_offset(g.node(i)[0] - c, 1.0), r) * a.field.values[i];
  return s * g.cell_volume();
}

}  // namespace

TEST_CASE("kappa") {
  CHECK(kappa(SpaceParams{1, 1, 2, 1, 0, 2}) == doctest::Approx(3.0));
  CHECK(kappa(SpaceParams{0.5, 2, 2, 2, 0, 1.5}) == doctest::Approx(3.0));
  CHECK(kappa(SpaceParams{-0.5, kInf, 2, 1, 0, 1}) == doctest::Approx(1.5));
}

TEST_CASE("zero field certificate") {
  const Grid g = make_grid(1, 10);
  const AtomSpec a{SampledField(g), make_cube(2, {1, 0}, 2.0, 1), SpaceParams{0.5, 2, 2, 1, 1, 1, 2}, nullptr};
  const auto c = validate_atom(a);
  CHECK(c.C_support);
  CHECK(c.C_smooth == 0.0);
  CHECK(c.C_moment_poly == 0.0);
  CHECK(c.C_moment_rand == 0.0);
  CHECK(c.pass);
}

TEST_CASE("validation bounds") {
  const Grid g = make_grid(1, 8);
  const SpaceParams sp{0.5, 2, 2, 1, 1, 1, 2};
  CHECK_THROWS_AS(validate_atom(AtomSpec{SampledField(g), make_cube(6, {0, 0}, 2.0, 1), sp, nullptr}), BoundsError);
  SpaceParams big = sp;
  big.K = 7;
  CHECK_THROWS_AS(validate_atom(AtomSpec{SampledField(g), make_cube(1, {0, 0}, 2.0, 1), big, nullptr}), BoundsError);
}

TEST_CASE("smoothness constant of a dilated bump matches the native norm") {
  const int J = 12, level = 3;
  const Grid g = make_grid(1, J);
  const auto native = SampledField::from_function(make_grid(1, J - level), [](const Point& x) {
    return cplx{g_profile(wrap_offset(x[0], 1.0)), 0.0};
  });
  for (double K : {0.5, 1.0, 1.5, 2.5}) {
    const SpaceParams sp{0.5, 2, 2, 1, K, 0, 2};
    const auto c = validate_atom(scaled_bump_atom(g, level, 5, sp));
    CHECK(c.C_support);
    CHECK(c.C_smooth == doctest::Approx(holder_norm(native, K)).epsilon(0.02));
    CHECK(c.C_moment_poly == 0.0);
  }
}

TEST_CASE("moment constant of a bump with nonzero mass grows like 2^{nu L}") {
  const Grid g = make_grid(1, 12);
  const SpaceParams sp{0.5, 2, 2, 1, 0.5, 1.0, 2};
  const double mass = integral_of_g(12);
  double prev = 0.0;
  for (int level = 1; level <= 5; ++level) {
    const auto c = validate_atom(scaled_bump_atom(g, level, 0, sp));
    CHECK(c.C_moment_poly == doctest::Approx(mass * std::ldexp(1.0, level)).epsilon(0.1));
    if (prev > 0.0) CHECK(c.C_moment_poly / prev == doctest::Approx(2.0).epsilon(0.1));
    // the constant 1 is in the battery
    CHECK(c.C_moment_rand >= c.C_moment_poly * (1 - 1e-12) / (1.0 + 1e-12));
    prev = c.C_moment_poly;
  }
}

TEST_CASE("certificate constants are absolutely homogeneous") {
  const Grid g = make_grid(1, 10);
  const SpaceParams sp{0.5, 2, 2, 1, 1.5, 1.0, 2};
  const AtomSpec a = make_atom(g, 3, {2, 0}, sp, AtomTemplate::oscillating, 0);
  AtomSpec b = a;
  b.field = cplx{0.0, -3.0} * a.field;
  const auto ca = validate_atom(a), cb = validate_atom(b);
  CHECK(cb.C_smooth == doctest::Approx(3.0 * ca.C_smooth).epsilon(1e-12));
  CHECK(cb.C_moment_poly == doctest::Approx(3.0 * ca.C_moment_poly).epsilon(1e-12));
  CHECK(cb.C_moment_rand == doctest::Approx(3.0 * ca.C_moment_rand).epsilon(1e-12));
}

TEST_CASE("constructed atoms") {
  const Grid g = make_grid(1, 10);
  const SpaceParams sp0{0.5, 2, 2, 1, 1, 0, 2};
  const auto a0 = make_atom(g, 0, {0, 0}, sp0, AtomTemplate::bump, 0);
  CHECK(validate_atom(a0).C_smooth <= 1.0 + 1e-6);
  CHECK(validate_atom(a0).pass);
  CHECK_THROWS_AS(make_atom(g, 2, {0, 0}, sp0, AtomTemplate::bump, 5), BoundsError);

  const SpaceParams sp{0.5, 2, 2, 1, 1, 2, 2};
  for (auto shape : {AtomTemplate::bump, AtomTemplate::oscillating}) {
    for (int level : {1, 3, 5}) {
      const auto a = make_atom(g, level, {1, 0}, sp, shape, 2);
      const double l1 = lp_norm(a.field, 1.0);
      CHECK(l1 > 0.0);
      CHECK(std::abs(centered_moment(a, 0)) < 1e-10 * l1);
      CHECK(std::abs(centered_moment(a, 1)) < 1e-10 * l1);
      const auto box = cube_geometry(a.cube, g).support_box;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!box.contains(g.node(i), g)) CHECK(a.field.values[i] == cplx{0.0});
      const auto c = validate_atom(a);
      CHECK(c.pass);
      CHECK(c.max_constant() == doctest::Approx(1.0).epsilon(1e-9));
      REQUIRE(a.exact);
      for (std::size_t i = 0; i < g.size(); i += 17) CHECK(std::abs((*a.exact)(g.node(i)) - a.field.values[i]) < 1e-14);
    }
  }
}

TEST_CASE("2D constructed atom") {
  const Grid g = make_grid(2, 7);
  const SpaceParams sp{0.5, 2, 2, 2, 1, 1, 2};
  const auto a = make_atom(g, 2, {1, 3}, sp, AtomTemplate::oscillating, 1);
  const auto c = validate_atom(a);
  CHECK(c.C_support);
  CHECK(c.pass);
  CHECK(std::abs(quadrature(a.field)) < 1e-12 * lp_norm(a.field, 1.0));
}

TEST_CASE("dilation") {
  const Grid g = make_grid(1, 12);
  const SpaceParams sp{0.5, 2, 2, 1, 1, 1, 2};
  const auto a = make_atom(g, 4, {3, 0}, sp, AtomTemplate::oscillating, 1);
  const auto same = dilate_atom(a, 0);
  CHECK(testing::max_diff(same.field, a.field) == 0.0);
  CHECK(same.cube == a.cube);
  const auto top = dilate_atom(a, 4);
  CHECK(top.cube.level == 0);
  const auto in = validate_atom(a), out = validate_atom(top);
  CHECK(out.C_support);
  CHECK(out.C_smooth <= in.C_smooth * 1.05);
  CHECK(out.C_moment_rand <= in.C_moment_rand * 1.05);
  CHECK_THROWS(dilate_atom(a, 5));
}

TEST_CASE("dilation keeps the moment constant on random atoms") {
  const Grid g = make_grid(1, 13);
  std::mt19937_64 rng(41);
  const SpaceParams sp{0.5, 2, 2, 1, 0.5, 1, 2};
  for (int t = 0; t < 10; ++t) {
    const int level = 1 + static_cast<int>(rng() % 5);
    const long m = static_cast<long>(rng() % (1u << level));
    const auto a = make_atom(g, level, {m, 0}, sp, AtomTemplate::bump, 0);
    const auto in = validate_atom(a);
    const int j = 1 + static_cast<int>(rng() % level);
    const auto out = validate_atom(dilate_atom(a, j));
    CHECK(out.C_moment_poly <= in.C_moment_poly * 1.05);
  }
}

TEST_CASE("kernels as atoms") {
  const Grid g = make_grid(1, 14);
  const KernelPair pair = build_mean_kernels(2, 0.5, g);
  const SpaceParams sp{0.5, 2, 2, 1, 1, 2, 2};
  const auto c0 = validate_atom(kernel_as_atom(pair, 0, sp));
  CHECK(c0.C_support);
  std::vector<double> constants;
  for (int j = 1; j <= 6; ++j) {
    const auto c = validate_atom(kernel_as_atom(pair, j, sp));
    CHECK(c.C_support);
    CHECK(c.C_moment_poly < 1e-8 * c.C_smooth);
    constants.push_back(c.max_constant());
  }
  const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
  CHECK(*hi / *lo <= 2.0);
  SpaceParams bad = sp;
  bad.L = 4;
  CHECK_THROWS_AS(kernel_as_atom(pair, 2, bad), HypothesisError);
}

TEST_CASE("synthesis") {
  const Grid g = make_grid(1, 10);
  const SpaceParams sp{0.5, 2, 2, 1, 1, 1, 2};
  const AtomFactory factory = [&](int level, std::array<long, 2> m) {
    return make_atom(g, level, m, sp, AtomTemplate::oscillating, 1);
  };
  CoeffArray one{1, {}};
  one.set(0, {0, 0}, 1.0);
  CHECK(testing::max_diff(synthesize(g, one, factory).field, factory(0, {0, 0}).field) == 0.0);
  const auto zero = synthesize(g, CoeffArray{1, {}}, factory);
  CHECK(zero.field.max_abs() == 0.0);
  CHECK(zero.certificates.empty());

  CoeffArray lam{1, {}};
  lam.set(1, {1, 0}, cplx{2.0, -1.0});
  lam.set(3, {5, 0}, 0.5);
  lam.set(2, {0, 0}, -1.0);
  const auto s = synthesize(g, lam, factory);
  SampledField direct(g);
  for (const auto& [key, value] : lam.entries) direct = direct + value * factory(key.level, key.index).field;
  CHECK(testing::max_diff(s.field, direct) < 1e-14);
  CHECK(s.certificates.size() == 3);

  const AtomFactory broken = [&](int level, std::array<long, 2> m) {
    AtomSpec a = factory(level, m);
    a.field = cplx{3.0} * a.field;
    return a;
  };
  CHECK_THROWS_AS(synthesize(g, lam, broken, SynthesisMode::strict), HypothesisError);
  CHECK_NOTHROW(synthesize(g, lam, broken, SynthesisMode::lenient));
}

TEST_CASE("analysis reconstructs synthesized atoms") {
  const Grid g = make_grid(1, 10);
  const SpaceParams sp{0.5, 2, 2, 1, 1, 1, 2};
  const KernelPair pair = build_mean_kernels(2, 0.5, g);
  const auto atom = make_atom(g, 2, {1, 0}, sp, AtomTemplate::oscillating, 1);
  const Analysis an = analyze(atom.field, g.depth() - 3, pair, sp);
  CHECK(an.band_error < 1e-6);
  // direct subtraction on the resolved band
  const double direct = lp_norm(an.reconstruction - atom.field, 2.0) / lp_norm(atom.field, 2.0);
  MESSAGE("direct relative error " << direct << ", resolved fraction " << an.resolved_fraction);
  CHECK(direct <= std::sqrt(std::max(0.0, 1.0 - an.resolved_fraction * an.resolved_fraction)) + 1e-6);
  for (const auto& [key, a] : an.atoms) CHECK(validate_atom(a).C_support);

  const Analysis zero = analyze(SampledField(g), 4, pair, sp);
  for (const auto& [key, v] : zero.coefficients.entries) CHECK(v == cplx{0.0});
  CHECK_THROWS_AS(analyze(atom.field, 8, pair, sp), BoundsError);
}

TEST_CASE("convergence bound") {
  const Grid g = make_grid(1, 10);
  const SpaceParams sp{0.5, 2, 2, 1, 1, 1, 2};
  const AtomFactory factory = [&](int level, std::array<long, 2> m) {
    return make_atom(g, level, m, sp, AtomTemplate::bump, 0);
  };
  const auto psi = testing::sample(g, [](double x) { return 1.0 + std::cos(kTwoPi * x); });
  CoeffArray one{1, {}};
  one.set(0, {0, 0}, cplx{0.0, 2.0});
  const auto rep = convergence_bound(one, sp, factory, psi);
  CHECK(rep.sum == doctest::Approx(2.0 * std::abs(quadrature(pointwise_product(factory(0, {0, 0}).field, psi)))).epsilon(1e-12));
  CHECK(rep.holds);
  const auto zero = convergence_bound(CoeffArray{1, {}}, sp, factory, psi);
  CHECK(zero.sum == 0.0);
  CHECK(zero.holds);

  SpaceParams weak = sp;
  weak.p = 0.5;
  weak.L = 0.2;  // sigma_p - s = 0.5
  CHECK_FALSE(convergence_bound(one, weak, factory, psi).hypothesis_ok);
}
