#include "atomlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "atomlab/error.hpp"
#include "atomlab/fft.hpp"
#include "atomlab/parallel.hpp"

namespace atomlab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double det(const Jacobian& j, int n) { return n == 1 ? j[0] : j[0] * j[3] - j[1] * j[2]; }

// Singular values of a 2x2 matrix.
std::pair<double, double> singular_values(const Jacobian& j) {
  const double a = j[0], b = j[1], c = j[2], d = j[3];
  const double s1 = a * a + b * b + c * c + d * d;
  const double s2 = std::sqrt(std::pow(a * a + b * b - c * c - d * d, 2) + 4.0 * std::pow(a * c + b * d, 2));
  return {std::sqrt(std::max(0.0, 0.5 * (s1 - s2))), std::sqrt(0.5 * (s1 + s2))};
}

Jacobian invert(const Jacobian& j, int n) {
  if (n == 1) return {1.0 / j[0], 0.0, 0.0, 1.0};
  const double dt = det(j, 2);
  return {j[3] / dt, -j[1] / dt, -j[2] / dt, j[0] / dt};
}

}  // namespace

Multiplied multiply(const SampledField& phi, const SampledField& f, const SpaceParams& params, double rho,
                    const NormEngine& engine) {
  validate(params);
  Multiplied out{pointwise_product(phi, f), {}};
  MultiplyReport& r = out.report;
  const auto [sp, spq] = sigma_indices(params.p, params.q, params.n);
  r.rho = rho;
  r.rho_ok_besov = rho > std::max(params.s, sp - params.s);
  r.rho_ok_tl = rho > std::max(params.s, spq - params.s);
  r.phi_norm = holder_norm(phi, rho);
  r.f_besov = engine.besov(f, params);
  r.g_besov = engine.besov(out.g, params);
  const double denom = r.phi_norm * r.f_besov;
  r.ratio_besov = denom > 0.0 ? r.g_besov / denom : 0.0;
  if (!std::isinf(params.p)) {
    r.f_tl = engine.tl(f, params);
    r.g_tl = engine.tl(out.g, params);
    const double dt = r.phi_norm * *r.f_tl;
    r.ratio_tl = dt > 0.0 ? *r.g_tl / dt : 0.0;
  }
  return out;
}

AtomProduct multiply_atom(const SampledField& phi, const AtomSpec& atom, double rho, const ValidationOptions& options) {
  AtomProduct out{atom, {}, validate_atom(atom, options), holder_norm(phi, rho), 0.0,
                  rho >= std::max(atom.params.K, atom.params.L)};
  out.atom.field = pointwise_product(phi, atom.field);
  out.atom.field.support_hint = atom.field.support_hint;
  if (atom.exact) {
    const TrigInterpolant phi_at(phi);
    const auto inner = atom.exact;
    out.atom.exact = std::make_shared<const PointFunction>(
        [inner, phi_at](const Point& x) { return phi_at(x) * (*inner)(x); });
  }
  out.certificate = validate_atom(out.atom, options);
  const double in = out.input_certificate.max_constant();
  out.inflation = in > 0.0 ? out.certificate.max_constant() / in : 0.0;
  return out;
}

DiffeoProfile default_profile(const Grid& grid) {
  const double P = grid.period();
  if (grid.dim() == 1) {
    return {[P](const Point& x) { return Point{P / kTwoPi * std::sin(kTwoPi * x[0] / P), 0.0}; },
            [P](const Point& x) { return Jacobian{std::cos(kTwoPi * x[0] / P), 0.0, 0.0, 0.0}; }};
  }
  // eta_i = P / 2pi * (2/3 sin(2 pi x_i / P) + 1/3 sin(2 pi (x_0 + x_1) / P)); row sums of J(eta) <= 4/3.
  return {[P](const Point& x) {
            const double both = std::sin(kTwoPi * (x[0] + x[1]) / P) / 3.0;
            return Point{P / kTwoPi * (2.0 / 3.0 * std::sin(kTwoPi * x[0] / P) + both),
                         P / kTwoPi * (2.0 / 3.0 * std::sin(kTwoPi * x[1] / P) + both)};
          },
          [P](const Point& x) {
            const double both = std::cos(kTwoPi * (x[0] + x[1]) / P) / 3.0;
            return Jacobian{2.0 / 3.0 * std::cos(kTwoPi * x[0] / P) + both, both, both,
                            2.0 / 3.0 * std::cos(kTwoPi * x[1] / P) + both};
          }};
}

DiffeoProfile sampled_profile(const SampledField& eta0, const std::optional<SampledField>& eta1) {
  const Grid& g = eta0.grid;
  const int n = g.dim();
  if (n == 2 && !eta1) throw BoundsError("2D profile needs two components");
  std::vector<TrigInterpolant> comps{TrigInterpolant(eta0)};
  if (n == 2) comps.emplace_back(*eta1);
  std::vector<TrigInterpolant> derivs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const SampledField& c = i == 0 ? eta0 : *eta1;
      derivs.emplace_back(differentiate(c, j == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1}));
    }
  auto cs = std::make_shared<const std::vector<TrigInterpolant>>(std::move(comps));
  auto ds = std::make_shared<const std::vector<TrigInterpolant>>(std::move(derivs));
  return {[cs, n](const Point& x) {
            return Point{(*cs)[0](x).real(), n == 2 ? (*cs)[1](x).real() : 0.0};
          },
          [ds, n](const Point& x) {
            if (n == 1) return Jacobian{(*ds)[0](x).real(), 0.0, 0.0, 0.0};
            return Jacobian{(*ds)[0](x).real(), (*ds)[1](x).real(), (*ds)[2](x).real(), (*ds)[3](x).real()};
          }};
}

std::string diffeo_kind_name(DiffeoKind kind) {
  switch (kind) {
    case DiffeoKind::identity: return "identity";
    case DiffeoKind::translation: return "translation";
    case DiffeoKind::perturbation: return "perturbation";
  }
  return "identity";
}

DiffeoKind parse_diffeo_kind(const std::string& name) {
  if (name == "identity") return DiffeoKind::identity;
  if (name == "translation") return DiffeoKind::translation;
  if (name == "perturbation") return DiffeoKind::perturbation;
  throw ConfigError("unknown diffeomorphism kind '" + name + "'");
}

Point Diffeo::forward(const Point& x) const {
  const double P = grid_.period();
  Point y = x;
  if (kind_ == DiffeoKind::translation) {
    y = {x[0] + shift_[0], x[1] + shift_[1]};
  } else if (kind_ == DiffeoKind::perturbation) {
    const Point e = profile_->eta(x);
    y = {x[0] + alpha_ * e[0], x[1] + alpha_ * e[1]};
  }
  y[0] = wrap_coordinate(y[0], P);
  y[1] = grid_.dim() == 2 ? wrap_coordinate(y[1], P) : 0.0;
  return y;
}

Jacobian Diffeo::jacobian(const Point& x) const {
  Jacobian j{1.0, 0.0, 0.0, 1.0};
  if (kind_ == DiffeoKind::perturbation) {
    const Jacobian e = profile_->jacobian(x);
    for (int k = 0; k < 4; ++k) j[k] += alpha_ * e[k];
  }
  return j;
}

Point Diffeo::inverse_at_node(std::size_t i) const {
  const Point y = grid_.node(i);
  const Point& d = inverse_displacement_[i];
  return {wrap_coordinate(y[0] + d[0], grid_.period()),
          grid_.dim() == 2 ? wrap_coordinate(y[1] + d[1], grid_.period()) : 0.0};
}

namespace {

// Newton solve of phi(x) = y on the torus; returns the final residual.
double newton_inverse(const Diffeo& phi, const Point& y, Point& x) {
  const Grid& g = phi.grid();
  const int n = g.dim();
  double res = kInf;
  for (int it = 0; it < 50; ++it) {
    const Point fx = phi.forward(x);
    const double r0 = wrap_offset(fx[0] - y[0], g.period());
    const double r1 = n == 2 ? wrap_offset(fx[1] - y[1], g.period()) : 0.0;
    res = std::max(std::abs(r0), std::abs(r1));
    if (res < 1e-14) break;
    const Jacobian ji = invert(phi.jacobian(x), n);
    x[0] -= ji[0] * r0 + ji[1] * r1;
    if (n == 2) x[1] -= ji[2] * r0 + ji[3] * r1;
  }
  return res;
}

}  // namespace

Point Diffeo::inverse(const Point& y) const {
  if (kind_ == DiffeoKind::identity) return y;
  if (kind_ == DiffeoKind::translation)
    return {wrap_coordinate(y[0] - shift_[0], grid_.period()),
            grid_.dim() == 2 ? wrap_coordinate(y[1] - shift_[1], grid_.period()) : 0.0};
  const Point e = profile_->eta(y);
  Point x{y[0] - alpha_ * e[0], y[1] - alpha_ * e[1]};
  if (newton_inverse(*this, y, x) > 1e-12) throw NumericError("Newton inversion did not converge");
  return {wrap_coordinate(x[0], grid_.period()), grid_.dim() == 2 ? wrap_coordinate(x[1], grid_.period()) : 0.0};
}

Diffeo make_diffeo(const Grid& grid, DiffeoKind kind, double alpha, const std::optional<DiffeoProfile>& profile,
                   Point shift, double rho) {
  if (!(rho >= 1.0)) throw BoundsError("diffeomorphism regularity rho must be >= 1");
  if (rho - 1.0 > kMaxHolderIndex) throw BoundsError("rho - 1 above the differentiation cap");
  const int n = grid.dim();
  Diffeo d;
  d.grid_ = grid;
  d.kind_ = kind;
  d.rho_ = rho;
  if (kind == DiffeoKind::translation) d.shift_ = {shift[0], n == 2 ? shift[1] : 0.0};
  if (kind == DiffeoKind::perturbation) {
    d.alpha_ = alpha;
    d.profile_ = std::make_shared<const DiffeoProfile>(profile ? *profile : default_profile(grid));
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Jacobian e = d.profile_->jacobian(grid.node(i));
      const double row0 = std::abs(alpha) * (std::abs(e[0]) + (n == 2 ? std::abs(e[1]) : 0.0));
      const double row1 = n == 2 ? std::abs(alpha) * (std::abs(e[2]) + std::abs(e[3])) : 0.0;
      worst = std::max({worst, row0, row1});
    }
    if (worst > 0.5)
      throw HypothesisError("perturbation too large: max ||alpha J(eta)||_inf = " + std::to_string(worst) +
                            " exceeds 0.5");
  }

  // Inverse samples.
  d.inverse_displacement_.assign(grid.size(), Point{0.0, 0.0});
  if (kind == DiffeoKind::translation) {
    for (auto& v : d.inverse_displacement_) v = {-d.shift_[0], -d.shift_[1]};
  } else if (kind == DiffeoKind::perturbation) {
    double eta_max = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point e = d.profile_->eta(grid.node(i));
      eta_max = std::max({eta_max, std::abs(e[0]), std::abs(e[1])});
    }
    std::vector<int> fallback(grid.size(), 0);
    parallel_for(grid.size(), [&](std::size_t i) {
      const Point y = grid.node(i);
      const Point e = d.profile_->eta(y);
      Point x{y[0] - alpha * e[0], y[1] - alpha * e[1]};
      double res = newton_inverse(d, y, x);
      if (res > 1e-12 && n == 1) {
        // phi is increasing: bisect t + alpha eta(t) - y on a bracket around y.
        const double radius = 2.0 * std::abs(alpha) * eta_max + grid.spacing();
        double lo = y[0] - radius, hi = y[0] + radius;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double v = mid + alpha * d.profile_->eta({mid, 0.0})[0] - y[0];
          (v < 0.0 ? lo : hi) = mid;
        }
        x = {0.5 * (lo + hi), 0.0};
        fallback[i] = 1;
      }
      d.inverse_displacement_[i] = {wrap_offset(x[0] - y[0], grid.period()),
                                    n == 2 ? wrap_offset(x[1] - y[1], grid.period()) : 0.0};
    });
    for (int f : fallback) d.bisection_fallbacks += f;
  }

  // Geometry from derivative bounds.
  d.c1 = kInf;
  d.c2 = 0.0;
  d.jacobian_bound = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Jacobian j = d.jacobian(grid.node(i));
    if (n == 1) {
      d.c1 = std::min(d.c1, std::abs(j[0]));
      d.c2 = std::max(d.c2, std::abs(j[0]));
    } else {
      const auto [lo, hi] = singular_values(j);
      d.c1 = std::min(d.c1, lo);
      d.c2 = std::max(d.c2, hi);
    }
    d.jacobian_bound = std::min(d.jacobian_bound, std::abs(det(j, n)));
  }

  // Shell sampling of |phi(x) - phi(y)| / |x - y| with unwrapped differences.
  d.sampled_c1 = kInf;
  d.sampled_c2 = 0.0;
  std::vector<Point> dirs{{1.0, 0.0}};
  if (n == 2) dirs = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}};
  std::vector<Point> disp(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.node(i);
    if (kind == DiffeoKind::perturbation) {
      const Point e = d.profile_->eta(x);
      disp[i] = {alpha * e[0], alpha * e[1]};
    } else {
      disp[i] = d.shift_;
    }
  }
  for (long step = 1; step <= static_cast<long>(grid.per_axis() / 2); step *= 2) {
    for (const Point& dir : dirs) {
      const double len = grid.spacing() * static_cast<double>(step) * std::hypot(dir[0], dir[1]);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t k = grid.shifted(i, step * static_cast<long>(dir[0]), step * static_cast<long>(dir[1]));
        const double dx = dir[0] * grid.spacing() * static_cast<double>(step) + disp[k][0] - disp[i][0];
        const double dy = dir[1] * grid.spacing() * static_cast<double>(step) + disp[k][1] - disp[i][1];
        const double ratio = std::hypot(dx, dy) / len;
        d.sampled_c1 = std::min(d.sampled_c1, ratio);
        d.sampled_c2 = std::max(d.sampled_c2, ratio);
      }
    }
  }

  // Hoelder budgets of phi and phi^{-1}, and the inversion residual.
  const double order = rho - 1.0;
  std::vector<SampledField> fwd(static_cast<std::size_t>(n * n), SampledField(grid));
  std::vector<SampledField> inv(static_cast<std::size_t>(n * n), SampledField(grid));
  d.inverse_residual = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Jacobian j = d.jacobian(grid.node(i));
    const Point xi = d.inverse_at_node(i);
    const Jacobian ji = invert(d.jacobian(xi), n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        fwd[static_cast<std::size_t>(a * n + b)].values[i] = j[static_cast<std::size_t>(2 * a + b)];
        inv[static_cast<std::size_t>(a * n + b)].values[i] = ji[static_cast<std::size_t>(2 * a + b)];
      }
    const Point y = grid.node(i);
    const Point back = d.forward(xi);
    d.inverse_residual = std::max({d.inverse_residual, std::abs(wrap_offset(back[0] - y[0], grid.period())),
                                   std::abs(wrap_offset(back[1] - y[1], grid.period()))});
  }
  d.holder_budget = 0.0;
  d.inverse_budget = 0.0;
  for (const auto& f : fwd) d.holder_budget += holder_norm(f, order);
  for (const auto& f : inv) d.inverse_budget += holder_norm(f, order);
  return d;
}

Diffeo compose_diffeos(const Diffeo& outer, const Diffeo& inner) {
  const Grid& g = inner.grid();
  const int n = g.dim();
  const double P = g.period();
  auto o = std::make_shared<const Diffeo>(outer);
  auto in = std::make_shared<const Diffeo>(inner);
  DiffeoProfile prof{[o, in, P, n](const Point& x) {
                       const Point y = o->forward(in->forward(x));
                       return Point{wrap_offset(y[0] - x[0], P), n == 2 ? wrap_offset(y[1] - x[1], P) : 0.0};
                     },
                     [o, in, n](const Point& x) {
                       const Jacobian a = o->jacobian(in->forward(x));
                       const Jacobian b = in->jacobian(x);
                       Jacobian c{};
                       if (n == 1) {
                         c = {a[0] * b[0] - 1.0, 0.0, 0.0, 0.0};
                       } else {
                         c = {a[0] * b[0] + a[1] * b[2] - 1.0, a[0] * b[1] + a[1] * b[3],
                              a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3] - 1.0};
                       }
                       return c;
                     }};
  return make_diffeo(g, DiffeoKind::perturbation, 1.0, prof, {0.0, 0.0}, std::min(outer.rho(), inner.rho()));
}

namespace {

InterpMethod interp_for(const Grid& g) { return g.size() <= 8192 ? InterpMethod::trig : InterpMethod::cubic; }

double top_band_fraction(const SampledField& g) {
  const auto c = fft::forward(g.values, g.grid.dim(), g.grid.per_axis());
  const std::size_t N = g.grid.per_axis();
  const long edge = static_cast<long>(N / 4);
  double top = 0.0, all = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto [k0, k1] = g.grid.axis_index(k);
    const long m = std::max(std::abs(fft::signed_mode(k0, N)),
                            g.grid.dim() == 2 ? std::abs(fft::signed_mode(k1, N)) : 0L);
    const double e = std::norm(c[k]);
    all += e;
    if (m >= edge) top += e;
  }
  return all > 0.0 ? top / all : 0.0;
}

// Local maximization of |F| around a node by golden-section sweeps along the axes.
double refine_sup(const std::function<cplx(const Point&)>& F, const Grid& g, std::size_t node) {
  Point x = g.node(node);
  const double h = g.spacing();
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int sweep = 0; sweep < (g.dim() == 2 ? 4 : 1); ++sweep) {
    for (int ax = 0; ax < g.dim(); ++ax) {
      double a = x[ax] - h, b = x[ax] + h;
      auto val = [&](double t) {
        Point y = x;
        y[ax] = t;
        return std::abs(F(y));
      };
      double c = b - phi * (b - a), d = a + phi * (b - a);
      double fc = val(c), fd = val(d);
      for (int it = 0; it < 80 && b - a > 1e-13 * h; ++it) {
        if (fc > fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - phi * (b - a);
          fc = val(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + phi * (b - a);
          fd = val(d);
        }
      }
      const double t = 0.5 * (a + b);
      if (val(t) > std::abs(F(x))) x[ax] = t;
    }
  }
  return std::abs(F(x));
}

double continuum_sup(const std::function<cplx(const Point&)>& F, const SampledField& samples) {
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t top = std::min<std::size_t>(3, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return std::abs(samples.values[a]) > std::abs(samples.values[b]); });
  double best = 0.0;
  for (std::size_t k = 0; k < top; ++k) best = std::max(best, refine_sup(F, samples.grid, order[k]));
  return best;
}

}  // namespace

SampledField pullback(const SampledField& f, const Diffeo& phi) {
  const Grid& g = f.grid;
  if (!(g == phi.grid())) throw BoundsError("field and diffeomorphism on different grids");
  if (phi.kind() == DiffeoKind::identity) return SampledField(g, f.values);
  std::vector<Point> pts(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pts[i] = phi.forward(g.node(i));
  return SampledField(g, evaluate_offgrid(f, pts, interp_for(g)));
}

SampledField pushforward(const SampledField& f, const Diffeo& phi) {
  const Grid& g = f.grid;
  if (!(g == phi.grid())) throw BoundsError("field and diffeomorphism on different grids");
  if (phi.kind() == DiffeoKind::identity) return SampledField(g, f.values);
  std::vector<Point> pts(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pts[i] = phi.inverse_at_node(i);
  return SampledField(g, evaluate_offgrid(f, pts, interp_for(g)));
}

Composed compose(const SampledField& f, const Diffeo& phi, const SpaceParams& params, const NormEngine& engine) {
  validate(params);
  Composed out{pullback(f, phi), {}};
  ComposeReport& r = out.report;
  const auto [sp, spq] = sigma_indices(params.p, params.q, params.n);
  (void)spq;
  r.rho_ok = phi.rho() > std::max(params.s, 1.0 + sp - params.s);
  r.f_besov = engine.besov(f, params);
  r.g_besov = engine.besov(out.g, params);
  r.ratio_besov = r.f_besov > 0.0 ? r.g_besov / r.f_besov : 0.0;
  if (!std::isinf(params.p)) {
    r.f_tl = engine.tl(f, params);
    r.g_tl = engine.tl(out.g, params);
    r.ratio_tl = *r.f_tl > 0.0 ? *r.g_tl / *r.f_tl : 0.0;
  }
  r.top_band_fraction = top_band_fraction(out.g);
  r.aliasing_warning = r.top_band_fraction > 0.01;
  return out;
}

ChangeOfVariablesReport lp_change_of_variables(const SampledField& f, const Diffeo& phi, double p) {
  if (!(p > 0.0)) throw BoundsError("p must be positive");
  const Grid& g = f.grid;
  const int n = g.dim();
  ChangeOfVariablesReport r;
  r.p = p;
  const SampledField composed = pullback(f, phi);
  if (std::isinf(p)) {
    const TrigInterpolant fi(f);
    r.rhs = continuum_sup([&](const Point& x) { return fi(x); }, f);
    r.lhs = continuum_sup([&](const Point& x) { return fi(phi.forward(x)); }, composed);
    r.jacobian_limit = 1.0;
  } else {
    r.lhs = lp_norm(composed, p);
    r.rhs = lp_norm(f, p);
    r.jacobian_limit = std::pow(1.0 / phi.jacobian_bound, 1.0 / p);
  }
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;

  // mass(phi^{-1}(A)) by counting nodes x with phi(x) in A, boxes of >= 64 nodes.
  r.box_limit = std::pow(1.0 / phi.c1, n);
  std::vector<Point> images(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) images[i] = phi.forward(g.node(i));
  for (int level = 1; level <= g.depth(); ++level) {
    const double nodes_per_box = std::pow(std::ldexp(1.0, g.depth() - level), n);
    if (nodes_per_box < 64.0) break;
    const long count = 1L << level;
    const double side = std::ldexp(g.period(), -level);
    std::vector<double> hits(static_cast<std::size_t>(n == 2 ? count * count : count), 0.0);
    for (const Point& y : images) {
      const long a = std::min(count - 1, static_cast<long>(std::floor(y[0] / side)));
      const long b = n == 2 ? std::min(count - 1, static_cast<long>(std::floor(y[1] / side))) : 0;
      hits[static_cast<std::size_t>(a * (n == 2 ? count : 1) + b)] += 1.0;
    }
    for (double h : hits) r.max_box_ratio = std::max(r.max_box_ratio, h / nodes_per_box);
    r.boxes += static_cast<int>(hits.size());
  }
  return r;
}

HolderComposeReport holder_compose(const SampledField& f, const Diffeo& phi, double s) {
  HolderComposeReport r;
  r.s = s;
  r.rho_ok = std::max(1.0, s) <= phi.rho();
  r.f_norm = holder_norm(f, s);
  r.g_norm = holder_norm(pullback(f, phi), s);
  r.ratio = r.f_norm > 0.0 ? r.g_norm / r.f_norm : 0.0;
  return r;
}

Transported transport_atoms(const std::vector<AtomSpec>& atoms, const Diffeo& phi, const ValidationOptions& options) {
  const Grid& g = phi.grid();
  const int n = g.dim();
  Transported out;
  TransportPlan& plan = out.plan;
  plan.volume_bound = static_cast<int>(std::ceil(std::pow(phi.c2 / phi.c1 + 1.0, n) - 1e-12));
  plan.relabel.resize(atoms.size());

  double max_K = 0.0, max_L = 0.0, max_in = 0.0;
  std::vector<AtomCertificate> input(atoms.size());
  parallel_for(atoms.size(), [&](std::size_t i) { input[i] = validate_atom(atoms[i], options); });
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].field.grid == g)) throw BoundsError("atom and diffeomorphism on different grids");
    max_K = std::max(max_K, atoms[i].params.K);
    max_L = std::max(max_L, atoms[i].params.L);
    max_in = std::max(max_in, input[i].max_constant());
    plan.d_prime = std::max(plan.d_prime, atoms[i].cube.overlap / phi.c1 + 1.0);
  }
  out.L_route = max_L == 0.0 ? "L0" : "moment";
  out.rho_ok = max_L == 0.0 ? phi.rho() >= 1.0 : phi.rho() >= max_L + 1.0;
  const double b_phi = std::pow(1.0 + phi.holder_budget, std::ceil(std::max(max_K, max_L)) + 1.0);
  out.target_constant = b_phi * max_in;

  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const DyadicCube& c = atoms[i].cube;
    const int shift = g.depth() - c.level;
    const std::size_t node = g.flat(static_cast<std::size_t>(c.index[0]) << shift,
                                    n == 2 ? static_cast<std::size_t>(c.index[1]) << shift : 0);
    plan.relabel[i] = containing_cube(phi.inverse_at_node(node), c.level, g);
  }

  std::vector<std::size_t> order(atoms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(atoms[a].cube.level, atoms[a].cube.index) < std::tie(atoms[b].cube.level, atoms[b].cube.index);
  });
  std::vector<std::set<CoeffKey>> used;
  for (std::size_t i : order) {
    const CoeffKey key{atoms[i].cube.level, plan.relabel[i]};
    std::size_t fam = 0;
    while (fam < used.size() && used[fam].count(key)) ++fam;
    if (fam == used.size()) {
      if (used.size() == static_cast<std::size_t>(kMaxFamilies))
        throw NumericError("transport needs more than 64 families");
      used.emplace_back();
      plan.families.emplace_back();
    }
    used[fam].insert(key);
    plan.families[fam].push_back(i);
  }
  plan.M = static_cast<int>(plan.families.size());
  for (const auto& fam : plan.families)
    for (std::size_t a = 0; a < fam.size(); ++a)
      for (std::size_t b = a + 1; b < fam.size(); ++b)
        if (atoms[fam[a]].cube.level == atoms[fam[b]].cube.level && plan.relabel[fam[a]] == plan.relabel[fam[b]])
          plan.injective = false;

  out.atoms.resize(atoms.size(), AtomSpec{SampledField(g), {}, {}, nullptr});
  out.certificates.resize(atoms.size());
  ValidationOptions relaxed = options;
  relaxed.target_C = out.target_constant;
  parallel_for(atoms.size(), [&](std::size_t i) {
    const AtomSpec& a = atoms[i];
    AtomSpec b{SampledField(g), make_cube(a.cube.level, plan.relabel[i], plan.d_prime, n), a.params, nullptr};
    b.params.d = plan.d_prime;
    if (a.exact) {
      const auto inner = a.exact;
      const PointFunction fn = [inner, &phi](const Point& x) { return (*inner)(phi.forward(x)); };
      b.field = SampledField::from_function(g, fn);
    } else {
      b.field = pullback(a.field, phi);
    }
    b.field.support_hint = cube_geometry(b.cube, g).support_box;
    out.certificates[i] = validate_atom(b, relaxed);
    out.atoms[i] = std::move(b);
  });
  out.all_pass = std::all_of(out.certificates.begin(), out.certificates.end(),
                             [](const AtomCertificate& c) { return c.pass; });
  return out;
}

}  // namespace atomlab
