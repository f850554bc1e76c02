#include <doctest.h>

#include <cmath>
#include <sstream>

#include "atomlab/error.hpp"
#include "atomlab/io.hpp"
#include "helpers.hpp"

using namespace atomlab;
using testing::kTwoPi;

TEST_CASE("field round trip is bit-exact") {
  for (int n : {1, 2}) {
    const Grid g(n, n == 1 ? 6 : 4, 2.5);
    SampledField f(g);
    for (std::size_t i = 0; i < f.size(); ++i)
      f.values[i] = {std::sin(0.1 + 1.7 * static_cast<double>(i)) / 3.0, std::exp(-static_cast<double>(i) / 7.0) * 1e-300};
    std::stringstream ss;
    write_field(ss, f);
    const SampledField back = read_field(ss);
    CHECK(back.grid.dim() == n);
    CHECK(back.grid.depth() == g.depth());
    CHECK(back.grid.period() == 2.5);
    REQUIRE(back.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(back.values[i] == f.values[i]);
  }
}

TEST_CASE("coefficient round trip keeps order and values") {
  CoeffArray lambda;
  lambda.dim = 2;
  lambda.set(3, {5, 2}, {0.1, -0.2});
  lambda.set(0, {0, 0}, {1.0 / 3.0, 0.0});
  lambda.set(3, {-1, 9}, {-7e-17, 4.0});
  std::stringstream ss;
  write_coeffs(ss, lambda);
  const CoeffArray back = read_coeffs(ss);
  CHECK(back.dim == 2);
  CHECK(back.entries == lambda.entries);
  CHECK(back.get(3, {7, 1}) == cplx(-7e-17, 4.0));
}

TEST_CASE("diffeomorphism round trip") {
  const Grid g(1, 7);
  for (const auto kind : {DiffeoKind::identity, DiffeoKind::translation, DiffeoKind::perturbation}) {
    const Diffeo phi = make_diffeo(g, kind, 0.3, std::nullopt, {0.125, 0.0});
    std::stringstream ss;
    write_diffeo(ss, phi);
    const Diffeo back = read_diffeo(ss);
    CHECK(back.kind() == phi.kind());
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point y = g.node(i);
      err = std::max(err, std::abs(wrap_offset(back.forward(y)[0] - phi.forward(y)[0], 1.0)));
      err = std::max(err, std::abs(wrap_offset(back.inverse_at_node(i)[0] - phi.inverse_at_node(i)[0], 1.0)));
    }
    CHECK(err < 1e-12);
  }
}

TEST_CASE("malformed inputs raise ConfigError") {
  std::istringstream bad_magic("ATOMLAB-FIELD v2 n=1 J=4 period=1\n");
  CHECK_THROWS_AS(read_field(bad_magic), ConfigError);
  std::istringstream truncated("ATOMLAB-FIELD v1 n=1 J=4 period=1\n0,0\n1,1\n");
  CHECK_THROWS_AS(read_field(truncated), ConfigError);
  std::istringstream junk("ATOMLAB-COEFF v1 n=1\n0,0,1.0x,0\n");
  CHECK_THROWS_AS(read_coeffs(junk), ConfigError);
  std::istringstream arity("ATOMLAB-COEFF v1 n=1\n0,0,1\n");
  CHECK_THROWS_AS(read_coeffs(arity), ConfigError);
  CHECK_THROWS_AS(load_field("/nonexistent/dir/field.txt"), ConfigError);
}

TEST_CASE("parse_space") {
  const SpaceParams p = parse_space("1.5,inf,2,2,1", 1);
  CHECK(p.s == 1.5);
  CHECK(std::isinf(p.p));
  CHECK(p.q == 2.0);
  CHECK(p.K == 2.0);
  CHECK(p.L == 1.0);
  CHECK(p.d == 2.0);
  CHECK(parse_space("0,1,infinity,0,0,3", 2).d == 3.0);
  CHECK_THROWS_AS(parse_space("1,2", 1), ConfigError);
  CHECK_THROWS_AS(parse_space("1,0,2", 1), ConfigError);
  CHECK_THROWS_AS(parse_space("1,2,2,-1", 1), ConfigError);
  CHECK_THROWS_AS(parse_space("1,2,2,0,0,5", 1), ConfigError);
}

TEST_CASE("params json round trip with infinite exponents") {
  SpaceParams p;
  p.s = -0.25;
  p.p = kInf;
  p.q = kInf;
  p.n = 2;
  p.K = 1.0;
  p.L = 3.5;
  const auto j = params_json(p);
  CHECK(j["p"] == "inf");
  CHECK(params_from_json(nlohmann::json::parse(j.dump())) == p);
  CHECK_THROWS_AS(params_from_json(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(params_from_json({{"p", "two"}}), ConfigError);
  CHECK(format_real(kInf) == "inf");
}
