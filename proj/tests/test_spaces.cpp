#include <doctest.h>

#include <random>

#include "atomlab/error.hpp"
#include "atomlab/spaces.hpp"
#include "helpers.hpp"

using namespace atomlab;
using testing::kTwoPi;

namespace {

// O(N^2) scan of |f(x) - f(y)| / |x - y|^sigma over all node pairs.
double brute_quotient(const SampledField& f, double sigma) {
  const Grid& g = f.grid;
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double d = torus_distance(g.node(i), g.node(j), g);
      best = std::max(best, std::abs(f.values[i] - f.values[j]) / std::pow(d, sigma));
    }
  return best;
}

SampledField constant(const Grid& g, double c) {
  return SampledField::from_function(g, [c](const Point&) { return cplx{c, 0.0}; });
}

SampledField random_trig(const Grid& g, std::mt19937_64& rng, int band) {
  std::normal_distribution<double> nd;
  std::vector<double> a(band + 1), b(band + 1);
  for (int k = 0; k <= band; ++k) {
    a[k] = nd(rng) / (1.0 + k * k);
    b[k] = nd(rng) / (1.0 + k * k);
  }
  return SampledField::from_function(g, [&](const Point& x) {
    double v = 0.0;
    for (int k = 0; k <= band; ++k) v += a[k] * std::cos(kTwoPi * k * x[0]) + b[k] * std::sin(kTwoPi * k * x[0]);
    return cplx{v, 0.0};
  });
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(validate(SpaceParams{0.5, 2, 2, 1, 1, 1, 2}));
  CHECK_THROWS_AS(validate(SpaceParams{0.5, 0, 2, 1}), BoundsError);
  CHECK_THROWS_AS(validate(SpaceParams{0.5, 2, -1, 1}), BoundsError);
  CHECK_THROWS_AS(validate(SpaceParams{0.5, 2, 2, 3}), BoundsError);
  CHECK_THROWS_AS(validate(SpaceParams{0.5, 2, 2, 1, -1}), BoundsError);
  CHECK_THROWS_AS(validate(SpaceParams{0.5, 2, 2, 1, 0, 0, 1.0}), BoundsError);
  CHECK_THROWS_AS(validate(SpaceParams{0.5, 2, 2, 1, 0, 0, 4.5}), BoundsError);
}

TEST_CASE("holder split") {
  CHECK(holder_split(0.0).whole == 0);
  CHECK(holder_split(0.0).frac == 0.0);
  CHECK(holder_split(1.0).whole == 0);
  CHECK(holder_split(1.0).frac == 1.0);
  CHECK(holder_split(1.5).whole == 1);
  CHECK(holder_split(1.5).frac == 0.5);
  CHECK(holder_split(3.0).whole == 2);
}

TEST_CASE("L_p norms") {
  const Grid g = make_grid(1, 8);
  CHECK(lp_norm(constant(g, 2.0), 3.0) == doctest::Approx(2.0).epsilon(1e-14));
  const auto s = testing::sample(g, [](double x) { return std::sin(kTwoPi * x); });
  CHECK(std::abs(lp_norm(s, 2.0) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(lp_norm(s, kInf) - 1.0) <= g.spacing());
  CHECK(lp_norm(s, 0.5) > 0.0);
}

TEST_CASE("ell_q norms are nonincreasing in q") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(10);
    for (auto& v : x) v = u(rng);
    double prev = kInf;
    for (double q : {0.5, 1.0, 1.5, 2.0, 4.0, kInf}) {
      const double n = ell_q(x, q);
      CHECK(n <= prev * (1 + 1e-14));
      prev = n;
    }
  }
}

TEST_CASE("Lipschitz seminorms") {
  const Grid g = make_grid(1, 9);
  CHECK(lip_seminorm(constant(g, 4.0), 0.3) == 0.0);
  CHECK(std::abs(lip_seminorm(testing::sample(g, testing::tent), 1.0) - 1.0) < 1e-12);
  const auto root = testing::sample(g, [](double x) { return std::sqrt(testing::tent(x)); });
  const double shells = lip_seminorm(root, 0.5);
  CHECK(shells == doctest::Approx(1.0).epsilon(0.02));
  CHECK(shells == doctest::Approx(brute_quotient(root, 0.5)).epsilon(0.02));
}

TEST_CASE("Hoelder norms") {
  const Grid g = make_grid(1, 9);
  CHECK(holder_norm(constant(g, 3.0), 0.5) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(holder_norm(constant(g, 3.0), 0.0) == doctest::Approx(3.0).epsilon(1e-14));
  // Shell values bracket the brute-force supremum within the factor 2^sigma.
  const auto s = testing::sample(g, [](double x) { return std::sin(kTwoPi * x); });
  const double brute = brute_quotient(s, 0.5);
  CHECK(holder_norm(s, 0.5) - 1.0 <= brute * (1 + 1e-12));
  CHECK(brute <= (holder_norm(s, 0.5) - 1.0) * std::sqrt(2.0));
  // C^1.5 norm: sup |f| + sup |f'| + [f']_{0.5}
  const auto ds = testing::sample(g, [](double x) { return kTwoPi * std::cos(kTwoPi * x); });
  const double dbrute = brute_quotient(ds, 0.5);
  const double seminorm = holder_norm(s, 1.5) - 1.0 - kTwoPi;
  CHECK(seminorm <= dbrute * (1 + 1e-9));
  CHECK(dbrute <= seminorm * std::sqrt(2.0));
}

TEST_CASE("shell seminorm is within 2^sigma of the full pair scan") {
  const Grid g = make_grid(1, 8);
  std::mt19937_64 rng(31);
  for (int t = 0; t < 10; ++t) {
    const auto f = random_trig(g, rng, 20);
    for (double sigma : {0.25, 0.5, 1.0}) {
      const double shell = lip_seminorm(f, sigma), brute = brute_quotient(f, sigma);
      CHECK(shell <= brute * (1 + 1e-12));
      CHECK(brute <= shell * std::pow(2.0, sigma) * (1 + 1e-12));
    }
  }
}

TEST_CASE("integer Hoelder index dominates derivative sups") {
  const Grid g = make_grid(1, 10);
  std::mt19937_64 rng(37);
  for (int t = 0; t < 5; ++t) {
    const auto f = random_trig(g, rng, 8);
    for (int s = 1; s <= 3; ++s) {
      double sups = 0.0;
      for (int k = 0; k <= s; ++k) sups += differentiate(f, {k, 0}).max_abs();
      // secant quotients at offset h see the top derivative up to (k h)^2 / 24
      CHECK(holder_norm(f, s) >= sups * (1 - 1e-3));
    }
  }
}

TEST_CASE("Hoelder norm of a dilate uses the scaling identity") {
  const Grid g = make_grid(1, 10);
  auto fn = [](double x) { return std::sin(kTwoPi * x); };
  const auto f = testing::sample(g, fn);
  // f(2 .) sampled directly
  const auto f2 = testing::sample(g, [](double x) { return std::sin(2.0 * kTwoPi * x); });
  CHECK(holder_norm(f, 1.5, 2.0) == doctest::Approx(holder_norm(f2, 1.5)).epsilon(0.02));
}

TEST_CASE("sigma indices") {
  auto a = sigma_indices(2, 2, 1);
  CHECK(a.first == 0.0);
  CHECK(a.second == 0.0);
  auto b = sigma_indices(0.5, 1, 1);
  CHECK(b.first == doctest::Approx(1.0));
  CHECK(b.second == doctest::Approx(1.0));
  auto c = sigma_indices(2, 0.5, 2);
  CHECK(c.first == 0.0);
  CHECK(c.second == doctest::Approx(2.0));
}

TEST_CASE("b_pq sequence norms") {
  CoeffArray one{1, {}};
  one.set(0, {0, 0}, 1.0);
  for (double p : {0.5, 2.0, kInf})
    for (double q : {1.0, kInf}) CHECK(bpq_norm(one, p, q) == doctest::Approx(1.0));
  CoeffArray two{1, {}};
  two.set(0, {0, 0}, 3.0);
  two.set(1, {4, 0}, 4.0);  // reduced to m = 0
  CHECK(two.get(1, {0, 0}) == cplx{4.0});
  CHECK(bpq_norm(two, 2, 2) == doctest::Approx(5.0).epsilon(1e-15));
  CoeffArray geo{1, {}};
  geo.set(0, {0, 0}, 1.0);
  geo.set(1, {0, 0}, 0.5);
  for (double p : {0.7, 2.0, kInf}) CHECK(bpq_norm(geo, p, 1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(bpq_norm(CoeffArray{1, {}}, 2, 2) == 0.0);
}

TEST_CASE("f_pq sequence norms") {
  const Grid g = make_grid(1, 10);
  CoeffArray one{1, {}};
  one.set(0, {0, 0}, 1.0);
  CHECK(fpq_norm(one, 2, 2, g) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fpq_norm(one, 0.5, 3, g) == doctest::Approx(1.0).epsilon(1e-14));

  CoeffArray disjoint{1, {}};
  disjoint.set(3, {1, 0}, 2.0);
  disjoint.set(3, {5, 0}, cplx{0.0, -1.5});
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    const double b = bpq_norm(disjoint, p, p);
    CHECK(std::abs(fpq_norm(disjoint, p, p, g) - b) < 1e-12 * b);
  }

  // Two-level stack at p = 2, q = 1: on Q_{1,0} the integrand is (1 + sqrt 2)^2,
  // elsewhere 1, each on half the torus.
  CoeffArray stack{1, {}};
  stack.set(0, {0, 0}, 1.0);
  stack.set(1, {0, 0}, 1.0);
  CHECK(fpq_norm(stack, 2, 2, g) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(fpq_norm(stack, 2, 1, g) == doctest::Approx(std::sqrt(2.0 + std::sqrt(2.0))).epsilon(1e-14));
  // sup convention at p = infinity: 1 + 1 on Q_{1,0}
  CHECK(fpq_norm(stack, kInf, 1, g) == doctest::Approx(2.0).epsilon(1e-15));
  CoeffArray deep{1, {}};
  deep.set(8, {0, 0}, 1.0);
  CHECK_THROWS_AS(fpq_norm(deep, 2, 2, g), BoundsError);
}

TEST_CASE("Hoelder product") {
  const Grid g = make_grid(1, 9);
  std::mt19937_64 rng(11);
  const auto f = random_trig(g, rng, 6);
  const auto r1 = holder_product(constant(g, 1.0), f, 1.5);
  CHECK(r1.ratio == doctest::Approx(1.0).epsilon(1e-12));
  const auto r2 = holder_product(constant(g, 2.0), constant(g, 2.0), 0.5);
  CHECK(r2.product.values[7].real() == doctest::Approx(4.0));
  CHECK(r2.ratio == doctest::Approx(1.0).epsilon(1e-14));
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto a = random_trig(g, rng, 8), b = random_trig(g, rng, 8);
    worst = std::max(worst, holder_product(a, b, 1.5).ratio);
  }
  MESSAGE("max C^1.5 product ratio " << worst);
  CHECK(worst <= 4.0);
  CHECK(holder_product(SampledField(g), f, 1.0).ratio == 0.0);
}

TEST_CASE("norms are absolutely homogeneous and subadditive") {
  const Grid g = make_grid(1, 8);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const auto f = random_trig(g, rng, 10), h = random_trig(g, rng, 10);
    const cplx c{0.3, -2.0};
    for (double p : {1.0, 2.0, 3.5, kInf}) {
      CHECK(lp_norm(c * f, p) == doctest::Approx(std::abs(c) * lp_norm(f, p)).epsilon(1e-13));
      CHECK(lp_norm(f + h, p) <= lp_norm(f, p) + lp_norm(h, p) + 1e-12);
    }
    for (double s : {0.25, 1.0, 2.5}) {
      CHECK(holder_norm(c * f, s) == doctest::Approx(std::abs(c) * holder_norm(f, s)).epsilon(1e-13));
      CHECK(holder_norm(f + h, s) <= holder_norm(f, s) + holder_norm(h, s) + 1e-10);
    }
  }
}

TEST_CASE("Hoelder norms are nondecreasing in the index") {
  const Grid g = make_grid(1, 9);
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    const auto f = random_trig(g, rng, 12);
    double prev = 0.0;
    for (double s : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
      const double n = holder_norm(f, s);
      CHECK(n >= prev * (1 - 1e-12));
      prev = n;
    }
  }
}

TEST_CASE("b_pq is nonincreasing in q and f_pq matches b_pq on one level") {
  const Grid g = make_grid(1, 9);
  std::mt19937_64 rng(29);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    CoeffArray lam{1, {}};
    for (int k = 0; k < 8; ++k) {
      const int level = static_cast<int>(rng() % 6);
      lam.set(level, {static_cast<long>(rng() % (1u << level)), 0}, cplx{nd(rng), nd(rng)});
    }
    double prev = kInf;
    for (double q : {0.5, 1.0, 2.0, 8.0, kInf}) {
      const double b = bpq_norm(lam, 1.5, q);
      CHECK(b <= prev * (1 + 1e-14));
      prev = b;
    }
    const double bp = bpq_norm(lam, 2, 2), fp = fpq_norm(lam, 2, 2, g);
    CHECK(std::abs(bp - fp) < 1e-12 * bp);
  }
}

TEST_CASE("2D f_pq of a single cube") {
  const Grid g = make_grid(2, 6);
  CoeffArray lam{2, {}};
  lam.set(2, {1, 3}, 2.0);
  CHECK(fpq_norm(lam, 1.5, 0.7, g) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(bpq_norm(lam, 1.5, 0.7) == doctest::Approx(2.0).epsilon(1e-15));
}
