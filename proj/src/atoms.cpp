#include "atomlab/atoms.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "atomlab/battery.hpp"
#include "atomlab/error.hpp"
#include "atomlab/fft.hpp"
#include "atomlab/parallel.hpp"

namespace atomlab {
namespace {

double inv_p(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

double smooth_scale(const SpaceParams& params, int level) {
  return std::exp2(-level * (params.s - params.n * inv_p(params.p)));
}

double moment_scale(const SpaceParams& params, int level) { return std::exp2(-level * kappa(params)); }

const HolderBattery& battery_for(const Grid& grid, int level, int count, std::uint64_t seed) {
  using Key = std::tuple<int, int, double, int, int, std::uint64_t>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<HolderBattery>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[Key{grid.dim(), grid.depth(), grid.period(), level, count, seed}];
  if (!slot) slot = std::make_unique<HolderBattery>(grid, level, count, seed);
  return *slot;
}

double monomial(const std::array<double, 2>& y, const MultiIndex& beta, int n) {
  double v = std::pow(y[0], beta[0]);
  if (n == 2) v *= std::pow(y[1], beta[1]);
  return v;
}

std::array<double, 2> offset_from(const Point& x, const Point& center, const Grid& g) {
  return {wrap_offset(x[0] - center[0], g.period()),
          g.dim() == 2 ? wrap_offset(x[1] - center[1], g.period()) : 0.0};
}

double unit_bump(double r) {
  const double u = 1.0 - r * r;
  return u <= 2e-3 ? 0.0 : std::exp(-1.0 / u);
}

std::size_t center_node(const DyadicCube& cube, const Grid& g) {
  const int shift = g.depth() - cube.level;
  const auto i0 = static_cast<std::size_t>(cube.index[0]) << shift;
  const auto i1 = g.dim() == 2 ? static_cast<std::size_t>(cube.index[1]) << shift : 0;
  return g.flat(i0, i1);
}

SampledField scaled(const SampledField& f, double c) {
  SampledField out = f;
  for (auto& v : out.values) v *= c;
  return out;
}

}  // namespace

double AtomCertificate::max_constant() const { return std::max({C_smooth, C_moment_poly, C_moment_rand}); }

double kappa(const SpaceParams& params) {
  return params.s + params.L + params.n * (1.0 - inv_p(params.p));
}

AtomCertificate validate_atom(const AtomSpec& atom, const ValidationOptions& options) {
  const SampledField& f = atom.field;
  const Grid& g = f.grid;
  const SpaceParams& par = atom.params;
  const int level = atom.cube.level;
  if (level > g.depth() - 3)
    throw BoundsError("atom level " + std::to_string(level) + " exceeds J-3 = " + std::to_string(g.depth() - 3));
  if (par.K > kMaxHolderIndex) throw BoundsError("K above the differentiation cap 6");

  AtomCertificate cert;
  cert.cube = atom.cube;
  cert.params = par;
  cert.kappa = kappa(par);

  const CubeGeometry geom = cube_geometry(atom.cube, g);
  const double peak = f.max_abs();
  for (std::size_t i = 0; i < f.size() && cert.C_support; ++i)
    if (std::abs(f.values[i]) > options.support_tol * peak && !geom.support_box.contains(g.node(i), g))
      cert.C_support = false;

  cert.C_smooth = holder_norm(f, par.K, std::ldexp(1.0, -level)) / smooth_scale(par, level);

  if (par.L > 0.0 && peak > 0.0) {
    const double scale = moment_scale(par, level);
    const int top = holder_split(par.L).whole;
    for (int o = 0; o <= top; ++o) {
      for (const auto& beta : multi_indices(g.dim(), o)) {
        cplx mom{0.0, 0.0};
        for (std::size_t i = 0; i < f.size(); ++i) {
          if (f.values[i] == cplx{0.0, 0.0}) continue;
          mom += monomial(offset_from(g.node(i), geom.center, g), beta, g.dim()) * f.values[i];
        }
        cert.C_moment_poly = std::max(cert.C_moment_poly, std::abs(mom) * g.cell_volume() / scale);
      }
    }
    const HolderBattery& battery = battery_for(g, level, options.battery_count, options.battery_seed);
    const std::size_t node = center_node(atom.cube, g);
    for (std::size_t b = 0; b < battery.size(); ++b) {
      const double norm = battery.norm(b, par.L);
      if (norm <= 0.0) continue;
      cert.C_moment_rand = std::max(cert.C_moment_rand, std::abs(battery.pairing(b, f, node)) / (scale * norm));
    }
  }
  cert.pass = cert.C_support && cert.max_constant() <= options.target_C;
  return cert;
}

namespace {

// Closed form of a constructed atom: scale * (t(y) - sum_g c_g y^g B(|y|)^2),
// y = wrap(x - center) / radius.
struct TemplateAtom {
  Grid grid;
  Point center;
  double radius;
  AtomTemplate shape;
  std::vector<MultiIndex> basis;
  std::vector<double> coeffs;
  double scale = 1.0;

  double shape_value(const std::array<double, 2>& y) const {
    const double r = std::hypot(y[0], y[1]);
    const double b = unit_bump(r);
    return shape == AtomTemplate::bump ? b : b * std::cos(2.0 * std::numbers::pi * y[0]);
  }

  cplx operator()(const Point& x) const {
    auto y = offset_from(x, center, grid);
    y[0] /= radius;
    y[1] /= radius;
    const double b = unit_bump(std::hypot(y[0], y[1]));
    if (b == 0.0) return {0.0, 0.0};
    double v = shape_value(y);
    for (std::size_t a = 0; a < basis.size(); ++a) v -= coeffs[a] * monomial(y, basis[a], grid.dim()) * b * b;
    return {scale * v, 0.0};
  }
};

}  // namespace

AtomSpec make_atom(const Grid& grid, int level, std::array<long, 2> index, const SpaceParams& params,
                   AtomTemplate shape, int moment_order, const ValidationOptions& options) {
  validate(params);
  if (params.n != grid.dim()) throw BoundsError("space dimension differs from grid dimension");
  if (moment_order < 0 || moment_order > 4) throw BoundsError("moment_order must lie in [0, 4]");
  if (level < 0 || level > grid.depth() - 3) throw BoundsError("atom level exceeds J-3");
  const DyadicCube cube = make_cube(level, index, params.d, grid.dim());
  const CubeGeometry geom = cube_geometry(cube, grid);

  TemplateAtom t{grid, geom.center, 0.5 * geom.side, shape, {}, {}, 1.0};
  for (int o = 0; o < moment_order; ++o)
    for (const auto& a : multi_indices(grid.dim(), o)) t.basis.push_back(a);

  if (!t.basis.empty()) {
    const auto nb = static_cast<Eigen::Index>(t.basis.size());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
    std::vector<double> mono(t.basis.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      auto y = offset_from(grid.node(i), t.center, grid);
      y[0] /= t.radius;
      y[1] /= t.radius;
      const double b = unit_bump(std::hypot(y[0], y[1]));
      if (b == 0.0) continue;
      const double w = b * b;
      const double v = t.shape_value(y);
      for (std::size_t a = 0; a < mono.size(); ++a) mono[a] = monomial(y, t.basis[a], grid.dim());
      for (Eigen::Index a = 0; a < nb; ++a) {
        rhs[a] += mono[static_cast<std::size_t>(a)] * v;
        for (Eigen::Index c = 0; c < nb; ++c)
          gram(a, c) += mono[static_cast<std::size_t>(a)] * mono[static_cast<std::size_t>(c)] * w;
      }
    }
    const Eigen::VectorXd c = gram.colPivHouseholderQr().solve(rhs);
    t.coeffs.assign(c.data(), c.data() + c.size());
  }

  AtomSpec atom{SampledField::from_function(grid, t), cube, params, nullptr};
  atom.field.support_hint = geom.support_box;
  const double constant = validate_atom(atom, options).max_constant();
  if (constant > 0.0) {
    t.scale = 1.0 / constant;
    atom.field = scaled(atom.field, t.scale);
  }
  atom.exact = std::make_shared<const PointFunction>(t);
  return atom;
}

AtomSpec dilate_atom(const AtomSpec& atom, int j) {
  const int level = atom.cube.level;
  if (j < 0 || j > level)
    throw BoundsError("dilation step " + std::to_string(j) + " must lie in [0, level " + std::to_string(level) + "]");
  if (j == 0) return atom;
  const Grid& g = atom.field.grid;
  const SpaceParams& par = atom.params;
  const DyadicCube out_cube = make_cube(level - j, atom.cube.index, atom.cube.overlap, g.dim());
  const Point from = cube_geometry(atom.cube, g).center;
  const CubeGeometry to = cube_geometry(out_cube, g);
  const double factor = std::exp2(j * (par.s - par.n * inv_p(par.p)));
  const double shrink = std::ldexp(1.0, -j);

  auto source_point = [from, to, shrink, g](const Point& x) {
    const auto y = offset_from(x, to.center, g);
    return Point{from[0] + shrink * y[0], g.dim() == 2 ? from[1] + shrink * y[1] : 0.0};
  };

  AtomSpec out{SampledField(g), out_cube, par, nullptr};
  if (atom.exact) {
    const auto inner = atom.exact;
    const PointFunction fn = [inner, source_point, factor](const Point& x) {
      return factor * (*inner)(source_point(x));
    };
    out.field = SampledField::from_function(g, fn);
    out.exact = std::make_shared<const PointFunction>(fn);
  } else {
    std::vector<Point> pts(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) pts[i] = source_point(g.node(i));
    const InterpMethod method = g.size() <= 4096 ? InterpMethod::trig : InterpMethod::cubic;
    auto vals = evaluate_offgrid(atom.field, pts, method);
    for (auto& v : vals) v *= factor;
    out.field = SampledField(g, std::move(vals));
  }
  out.field.support_hint = to.support_box;
  return out;
}

AtomSpec kernel_as_atom(const KernelPair& pair, int j, const SpaceParams& params) {
  validate(params);
  if (params.L > pair.order + 1.0)
    throw HypothesisError("kernels are atoms only for L <= N + 1 (L=" + std::to_string(params.L) +
                          ", N=" + std::to_string(pair.order) + ")");
  const Grid& g = pair.grid;
  const double factor = std::exp2(-j * (params.s + params.n * (1.0 - inv_p(params.p))));
  AtomSpec atom{scaled(pair.kernel(j), factor), make_cube(j, {0, 0}, params.d, g.dim()), params, nullptr};
  return atom;
}

Synthesis synthesize(const Grid& grid, const CoeffArray& lambda, const AtomFactory& factory, SynthesisMode mode,
                     const ValidationOptions& options) {
  std::vector<std::pair<CoeffKey, cplx>> items(lambda.entries.begin(), lambda.entries.end());
  std::vector<std::optional<AtomSpec>> atoms(items.size());
  std::vector<AtomCertificate> certs(items.size());
  parallel_for(items.size(), [&](std::size_t i) {
    atoms[i] = factory(items[i].first.level, items[i].first.index);
    if (!(atoms[i]->field.grid == grid)) throw BoundsError("atom factory produced a field on another grid");
    certs[i] = validate_atom(*atoms[i], options);
  });
  Synthesis out{SampledField(grid), std::move(certs)};
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (mode == SynthesisMode::strict && !out.certificates[i].pass)
      throw HypothesisError("atom at level " + std::to_string(items[i].first.level) + " index " +
                            std::to_string(items[i].first.index[0]) + " failed validation (constant " +
                            std::to_string(out.certificates[i].max_constant()) + ")");
    const cplx c = items[i].second;
    const auto& a = atoms[i]->field.values;
    for (std::size_t k = 0; k < a.size(); ++k) out.field.values[k] += c * a[k];
  }
  return out;
}

namespace {

// Smooth partition of unity subordinate to the level-j cubes: theta_m is a
// tensor bump of radius one side around 2^-j m, normalized at the nodes.
double partition_weight(const Grid& g, int level, std::size_t node, const std::array<long, 2>& m) {
  const double side = std::ldexp(g.period(), -level);
  const Point x = g.node(node);
  double w = 1.0;
  for (int ax = 0; ax < g.dim(); ++ax)
    w *= unit_bump(wrap_offset(x[ax] - side * static_cast<double>(m[ax]), g.period()) / side);
  return w;
}

}  // namespace

Analysis analyze(const SampledField& f, int depth, const KernelPair& pair, const SpaceParams& params,
                 const ValidationOptions& options) {
  const Grid& g = f.grid;
  if (!(pair.grid == g)) throw BoundsError("kernel pair lives on a different grid");
  if (depth < 0 || depth > g.depth() - 3) throw BoundsError("analysis depth must lie in [0, J-3]");
  const int n = g.dim();
  double cells = 0.0;
  for (int j = 0; j <= depth; ++j) cells += std::exp2(j * n);
  if (cells * static_cast<double>(g.size()) > std::exp2(27)) throw BoundsError("analysis too large for this grid");

  // Calderon weights w_j = |khat_j|^2 / sum_i |khat_i|^2 on the resolved band.
  std::vector<std::vector<double>> power;
  for (int j = 0; j <= depth; ++j) {
    const auto c = fft::forward(pair.kernel(j).values, n, g.per_axis());
    std::vector<double> p(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) p[k] = std::norm(c[k]);
    power.push_back(std::move(p));
  }
  std::vector<double> total(g.size(), 0.0);
  for (const auto& p : power)
    for (std::size_t k = 0; k < p.size(); ++k) total[k] += p[k];
  const double peak = *std::max_element(total.begin(), total.end());
  std::vector<bool> resolved(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) resolved[k] = total[k] >= 1e-8 * peak;

  const auto fc = fft::forward(f.values, n, g.per_axis());
  std::vector<cplx> band(fc.size());
  for (std::size_t k = 0; k < fc.size(); ++k) band[k] = resolved[k] ? fc[k] : cplx{0.0, 0.0};
  const SampledField projected(g, fft::inverse(band, n, g.per_axis()));

  SpaceParams piece_params = params;
  piece_params.d = 2.0;
  Analysis out{CoeffArray{n, {}}, {}, SampledField(g), 0.0, 0.0};

  for (int j = 0; j <= depth; ++j) {
    std::vector<cplx> w(fc.size());
    for (std::size_t k = 0; k < fc.size(); ++k) w[k] = resolved[k] ? fc[k] * (power[j][k] / total[k]) : cplx{0.0, 0.0};
    const SampledField gj(g, fft::inverse(w, n, g.per_axis()));

    const long count = 1L << j;
    std::vector<std::array<long, 2>> cubes;
    for (long a = 0; a < count; ++a)
      for (long b = 0; b < (n == 2 ? count : 1); ++b) cubes.push_back({a, b});

    std::vector<double> norm(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double side = std::ldexp(g.period(), -j);
      const Point x = g.node(i);
      const long c0 = static_cast<long>(std::floor(x[0] / side + 0.5));
      const long c1 = n == 2 ? static_cast<long>(std::floor(x[1] / side + 0.5)) : 0;
      std::vector<std::array<long, 2>> near;
      for (long d0 = -1; d0 <= 1; ++d0)
        for (long d1 = (n == 2 ? -1 : 0); d1 <= (n == 2 ? 1 : 0); ++d1) {
          std::array<long, 2> m{((c0 + d0) % count + count) % count, n == 2 ? ((c1 + d1) % count + count) % count : 0};
          if (std::find(near.begin(), near.end(), m) == near.end()) near.push_back(m);
        }
      for (const auto& m : near) norm[i] += partition_weight(g, j, i, m);
    }

    std::vector<std::optional<AtomSpec>> pieces(cubes.size());
    std::vector<double> lambdas(cubes.size(), 0.0);
    parallel_for(cubes.size(), [&](std::size_t c) {
      const DyadicCube cube = make_cube(j, cubes[c], 2.0, n);
      SampledField piece(g);
      bool any = false;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double th = partition_weight(g, j, i, cubes[c]);
        if (th == 0.0) continue;
        piece.values[i] = (th / norm[i]) * gj.values[i];
        any = any || piece.values[i] != cplx{0.0, 0.0};
      }
      if (!any) return;
      piece.support_hint = cube_geometry(cube, g).support_box;
      AtomSpec atom{std::move(piece), cube, piece_params, nullptr};
      const double lambda = validate_atom(atom, options).max_constant();
      if (!(lambda > 0.0)) return;
      atom.field = scaled(atom.field, 1.0 / lambda);
      lambdas[c] = lambda;
      pieces[c] = std::move(atom);
    });
    for (std::size_t c = 0; c < cubes.size(); ++c) {
      if (!pieces[c]) continue;
      out.coefficients.set(j, cubes[c], lambdas[c]);
      const auto& a = pieces[c]->field.values;
      for (std::size_t k = 0; k < a.size(); ++k) out.reconstruction.values[k] += lambdas[c] * a[k];
      out.atoms.emplace(reduce_key(j, cubes[c], n), std::move(*pieces[c]));
    }
  }
  const double pf = lp_norm(projected, 2.0);
  const double ff = lp_norm(f, 2.0);
  out.band_error = pf > 0.0 ? lp_norm(out.reconstruction - projected, 2.0) / pf : lp_norm(out.reconstruction, 2.0);
  out.resolved_fraction = ff > 0.0 ? pf / ff : 1.0;
  return out;
}

ConvergenceReport convergence_bound(const CoeffArray& lambda, const SpaceParams& params,
                                    const AtomFactory& factory, const SampledField& test_fn,
                                    const ValidationOptions& options) {
  validate(params);
  ConvergenceReport rep;
  const auto [sp, spq] = sigma_indices(params.p, params.q, params.n);
  (void)spq;
  rep.hypothesis_ok = params.L > sp - params.s;
  rep.test_norm = holder_norm(test_fn, params.L);
  const double k = kappa(params);
  const double excess = params.n * std::max(0.0, 1.0 - inv_p(params.p));
  for (int v = 0; v <= lambda.max_level(); ++v) rep.level_sum += std::exp2(-v * (k - excess));

  std::vector<std::pair<CoeffKey, cplx>> items(lambda.entries.begin(), lambda.entries.end());
  std::vector<double> terms(items.size()), constants(items.size());
  parallel_for(items.size(), [&](std::size_t i) {
    const auto& [key, value] = items[i];
    const AtomSpec atom = factory(key.level, key.index);
    const cplx pairing = quadrature(pointwise_product(atom.field, test_fn));
    terms[i] = std::abs(value * pairing);
    double c = validate_atom(atom, options).max_constant();
    if (rep.test_norm > 0.0) c = std::max(c, std::abs(pairing) / (moment_scale(params, key.level) * rep.test_norm));
    constants[i] = c;
  });
  for (std::size_t i = 0; i < items.size(); ++i) {
    rep.sum += terms[i];
    rep.atom_constant = std::max(rep.atom_constant, constants[i]);
  }
  rep.bound_constant = rep.atom_constant * rep.test_norm * rep.level_sum;
  rep.b_p_inf = items.empty() ? 0.0 : bpq_norm(lambda, params.p, kInf);
  rep.holds = rep.sum <= rep.bound_constant * rep.b_p_inf * (1.0 + 1e-12);
  return rep;
}

}  // namespace atomlab
