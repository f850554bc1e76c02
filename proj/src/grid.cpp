#include "atomlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "atomlab/error.hpp"
#include "atomlab/fft.hpp"

namespace atomlab {

Grid::Grid(int dim, int depth, double period) : dim_(dim), depth_(depth), period_(period) {
  if (dim != 1 && dim != 2) throw BoundsError("grid dimension must be 1 or 2, got " + std::to_string(dim));
  const int cap = dim == 1 ? kMaxDepth1D : kMaxDepth2D;
  if (depth < kMinDepth || depth > cap)
    throw BoundsError("grid depth J=" + std::to_string(depth) + " outside [" + std::to_string(kMinDepth) +
                      ", " + std::to_string(cap) + "]");
  if (!(period > 0.0) || !std::isfinite(period)) throw BoundsError("grid period must be positive");
}

double Grid::cell_volume() const noexcept {
  const double h = spacing();
  return dim_ == 1 ? h : h * h;
}

std::array<std::size_t, 2> Grid::axis_index(std::size_t flat) const noexcept {
  if (dim_ == 1) return {flat, 0};
  return {flat >> depth_, flat & (per_axis() - 1)};
}

std::size_t Grid::flat(std::size_t i0, std::size_t i1) const noexcept {
  return dim_ == 1 ? i0 : (i0 << depth_) + i1;
}

std::size_t Grid::shifted(std::size_t flat_index, long s0, long s1) const noexcept {
  const auto n = static_cast<long>(per_axis());
  const auto mask = n - 1;
  auto [i0, i1] = axis_index(flat_index);
  const auto j0 = static_cast<std::size_t>((static_cast<long>(i0) + s0) & mask);
  if (dim_ == 1) return j0;
  const auto j1 = static_cast<std::size_t>((static_cast<long>(i1) + s1) & mask);
  return flat(j0, j1);
}

Point Grid::node(std::size_t flat_index) const noexcept {
  auto [i0, i1] = axis_index(flat_index);
  const double h = spacing();
  return {h * static_cast<double>(i0), dim_ == 1 ? 0.0 : h * static_cast<double>(i1)};
}

Grid make_grid(int n, int J, double period) { return Grid(n, J, period); }

double wrap_offset(double d, double period) {
  double r = d - period * std::floor(d / period + 0.5);
  if (r >= 0.5 * period) r -= period;
  if (r < -0.5 * period) r += period;
  return r;
}

double wrap_coordinate(double x, double period) {
  double r = x - period * std::floor(x / period);
  if (r >= period) r -= period;
  return r;
}

double torus_distance(const Point& a, const Point& b, const Grid& grid) {
  double acc = 0.0;
  for (int ax = 0; ax < grid.dim(); ++ax) {
    const double d = wrap_offset(a[ax] - b[ax], grid.period());
    acc += d * d;
  }
  return std::sqrt(acc);
}

bool TorusBox::contains(const Point& x, const Grid& grid) const {
  for (int ax = 0; ax < grid.dim(); ++ax) {
    if (half_width[ax] >= 0.5 * grid.period()) continue;
    const double off = wrap_offset(x[ax] - center[ax], grid.period());
    if (off < -half_width[ax] || off >= half_width[ax]) return false;
  }
  return true;
}

SampledField::SampledField(Grid g) : grid(g), values(g.size(), cplx{0.0, 0.0}) {}

SampledField::SampledField(Grid g, std::vector<cplx> v, std::optional<TorusBox> hint)
    : grid(g), values(std::move(v)), support_hint(hint) {
  if (values.size() != grid.size())
    throw BoundsError("field has " + std::to_string(values.size()) + " values, grid needs " +
                      std::to_string(grid.size()));
}

SampledField SampledField::from_function(const Grid& g, const std::function<cplx(const Point&)>& fn) {
  SampledField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = fn(g.node(i));
  return f;
}

double SampledField::max_abs() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v));
  return m;
}

bool SampledField::respects_support_hint(double rel_tol) const {
  if (!support_hint) return true;
  const double bound = rel_tol * max_abs();
  for (std::size_t i = 0; i < size(); ++i)
    if (!support_hint->contains(grid.node(i), grid) && std::abs(values[i]) > bound) return false;
  return true;
}

namespace {

void require_same_grid(const SampledField& a, const SampledField& b) {
  if (!(a.grid == b.grid)) throw BoundsError("fields live on different grids");
}

}  // namespace

SampledField operator+(const SampledField& a, const SampledField& b) {
  require_same_grid(a, b);
  SampledField r(a.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = a.values[i] + b.values[i];
  return r;
}

SampledField operator-(const SampledField& a, const SampledField& b) {
  require_same_grid(a, b);
  SampledField r(a.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = a.values[i] - b.values[i];
  return r;
}

SampledField operator*(cplx c, const SampledField& a) {
  SampledField r = a;
  for (auto& v : r.values) v *= c;
  return r;
}

SampledField pointwise_product(const SampledField& a, const SampledField& b) {
  require_same_grid(a, b);
  SampledField r(a.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = a.values[i] * b.values[i];
  if (a.support_hint) r.support_hint = a.support_hint;
  else if (b.support_hint) r.support_hint = b.support_hint;
  return r;
}

DyadicCube make_cube(int level, std::array<long, 2> index, double overlap, int dim) {
  if (level < 0) throw BoundsError("cube level must be nonnegative");
  if (level > 30) throw BoundsError("cube level too large");
  if (!(overlap >= 1.0) || overlap > kMaxOverlap)
    throw BoundsError("overlap factor must lie in [1, 4], got " + std::to_string(overlap));
  const long count = 1L << level;
  DyadicCube c;
  c.level = level;
  c.overlap = overlap;
  for (int ax = 0; ax < 2; ++ax) {
    long m = ax < dim ? index[ax] : 0;
    m %= count;
    if (m < 0) m += count;
    c.index[ax] = m;
  }
  return c;
}

CubeGeometry cube_geometry(const DyadicCube& cube, const Grid& grid) {
  if (cube.level > grid.depth())
    throw BoundsError("cube level " + std::to_string(cube.level) + " exceeds grid depth " +
                      std::to_string(grid.depth()));
  CubeGeometry g{};
  g.side = std::ldexp(grid.period(), -cube.level);
  const double half = 0.5 * cube.overlap * g.side;
  const double h = grid.spacing();
  const auto n = static_cast<long>(grid.per_axis());
  for (int ax = 0; ax < 2; ++ax) {
    if (ax >= grid.dim()) {
      g.center[ax] = 0.0;
      g.support_box.center[ax] = 0.0;
      g.support_box.half_width[ax] = 0.0;
      continue;
    }
    g.center[ax] = g.side * static_cast<double>(cube.index[ax]);
    g.support_box.center[ax] = g.center[ax];
    g.support_box.half_width[ax] = half;
    if (half >= 0.5 * grid.period()) {
      g.first_node[ax] = 0;
      g.node_count[ax] = static_cast<std::size_t>(n);
    } else {
      const long lo = static_cast<long>(std::ceil((g.center[ax] - half) / h - 1e-9));
      const long hi = static_cast<long>(std::ceil((g.center[ax] + half) / h - 1e-9));  // exclusive
      g.first_node[ax] = lo;
      g.node_count[ax] = static_cast<std::size_t>(std::max(0L, hi - lo));
    }
  }
  if (grid.dim() == 1) g.node_count[1] = 1;
  return g;
}

std::array<long, 2> containing_cube(const Point& x, int level, const Grid& grid) {
  const long count = 1L << level;
  std::array<long, 2> m{0, 0};
  for (int ax = 0; ax < grid.dim(); ++ax) {
    const double u = wrap_coordinate(x[ax], grid.period()) / grid.period();
    long k = static_cast<long>(std::floor(std::ldexp(u, level) + 0.5));
    k %= count;
    if (k < 0) k += count;
    m[ax] = k;
  }
  return m;
}

cplx quadrature(const SampledField& f) {
  cplx acc{0.0, 0.0};
  for (const auto& v : f.values) acc += v;
  return acc * f.grid.cell_volume();
}

std::vector<MultiIndex> multi_indices(int n, int order) {
  std::vector<MultiIndex> out;
  if (n == 1) {
    out.push_back({order, 0});
    return out;
  }
  for (int a = order; a >= 0; --a) out.push_back({a, order - a});
  return out;
}

namespace {

SampledField spectral_derivative(const SampledField& f, MultiIndex alpha) {
  const Grid& g = f.grid;
  const std::size_t n = g.per_axis();
  auto coeffs = fft::forward(f.values, g.dim(), n);
  const double w = 2.0 * std::numbers::pi / g.period();
  auto factor = [&](std::size_t idx, int order) -> cplx {
    if (order == 0) return 1.0;
    if (idx == n / 2 && order % 2 == 1) return 0.0;
    const double k = static_cast<double>(fft::signed_mode(idx, n));
    return std::pow(cplx(0.0, w * k), order);
  };
  std::vector<cplx> f0(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) {
    f0[i] = factor(i, alpha[0]);
    f1[i] = factor(i, g.dim() == 2 ? alpha[1] : 0);
  }
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    auto [i0, i1] = g.axis_index(k);
    coeffs[k] *= f0[i0] * (g.dim() == 2 ? f1[i1] : cplx(1.0));
  }
  return SampledField(g, fft::inverse(coeffs, g.dim(), n));
}

// Second-order central stencil of order r along one axis.
SampledField central_axis(const SampledField& f, int axis, int order) {
  if (order == 0) return f;
  const Grid& g = f.grid;
  const double h = g.spacing();
  SampledField r(g);
  auto at = [&](std::size_t i, long s) {
    return axis == 0 ? f.values[g.shifted(i, s, 0)] : f.values[g.shifted(i, 0, s)];
  };
  for (std::size_t i = 0; i < f.size(); ++i) {
    cplx d;
    switch (order) {
      case 1: d = (at(i, 1) - at(i, -1)) / (2.0 * h); break;
      case 2: d = (at(i, 1) - 2.0 * at(i, 0) + at(i, -1)) / (h * h); break;
      case 3: d = (at(i, 2) - 2.0 * at(i, 1) + 2.0 * at(i, -1) - at(i, -2)) / (2.0 * h * h * h); break;
      default:
        d = (at(i, 2) - 4.0 * at(i, 1) + 6.0 * at(i, 0) - 4.0 * at(i, -1) + at(i, -2)) / (h * h * h * h);
        break;
    }
    r.values[i] = d;
  }
  return r;
}

}  // namespace

SampledField differentiate(const SampledField& f, MultiIndex alpha, DiffMethod method) {
  if (alpha[0] < 0 || alpha[1] < 0) throw BoundsError("negative derivative order");
  if (f.grid.dim() == 1 && alpha[1] != 0) throw BoundsError("second axis derivative on a 1D grid");
  const int order = alpha[0] + alpha[1];
  if (order == 0) return f;
  if (method == DiffMethod::spectral) {
    if (order > kMaxSpectralOrder) throw BoundsError("spectral derivative order above 6");
    return spectral_derivative(f, alpha);
  }
  if (order > kMaxCentralOrder) throw BoundsError("central-difference derivative order above 4");
  return central_axis(central_axis(f, 0, alpha[0]), 1, alpha[1]);
}

TrigInterpolant::TrigInterpolant(const SampledField& f)
    : grid_(f.grid), coeffs_(fft::forward(f.values, f.grid.dim(), f.grid.per_axis())) {}

void TrigInterpolant::axis_factors(double x, std::vector<cplx>& out) const {
  const std::size_t n = grid_.per_axis();
  out.resize(n);
  const double theta = 2.0 * std::numbers::pi * x / grid_.period();
  const cplx step = std::polar(1.0, theta);
  cplx w{1.0, 0.0};
  for (std::size_t k = 0; k < n / 2; ++k) {
    if (k % 32 == 0) w = std::polar(1.0, theta * static_cast<double>(k));
    out[k] = w;
    if (k > 0) out[n - k] = std::conj(w);
    w *= step;
  }
  out[n / 2] = std::cos(theta * static_cast<double>(n / 2));
}

cplx TrigInterpolant::operator()(const Point& x) const {
  thread_local std::vector<cplx> e0, e1;
  const std::size_t n = grid_.per_axis();
  axis_factors(x[0], e0);
  if (grid_.dim() == 1) {
    cplx acc{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) acc += coeffs_[k] * e0[k];
    return acc;
  }
  axis_factors(x[1], e1);
  cplx acc{0.0, 0.0};
  for (std::size_t i0 = 0; i0 < n; ++i0) {
    cplx row{0.0, 0.0};
    const cplx* c = &coeffs_[i0 * n];
    for (std::size_t i1 = 0; i1 < n; ++i1) row += c[i1] * e1[i1];
    acc += e0[i0] * row;
  }
  return acc;
}

namespace {

// Periodic cubic spline second derivatives from nodal values (circulant solve by FFT).
std::vector<cplx> spline_second_derivatives(std::span<const cplx> values, double h) {
  const std::size_t n = values.size();
  auto c = fft::forward(values, 1, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const double lhs = (4.0 + 2.0 * std::cos(th)) / 6.0;
    const double rhs = (2.0 * std::cos(th) - 2.0) / (h * h);
    c[k] *= rhs / lhs;
  }
  return fft::inverse(c, 1, n);
}

cplx spline_eval(std::span<const cplx> f, std::span<const cplx> m, double x, double h, double period) {
  const std::size_t n = f.size();
  const double u = wrap_coordinate(x, period) / h;
  auto i = static_cast<std::size_t>(std::floor(u));
  if (i >= n) i = n - 1;
  const double t = u - static_cast<double>(i);
  const std::size_t j = (i + 1) % n;
  const double s = 1.0 - t;
  return s * f[i] + t * f[j] + (h * h / 6.0) * ((s * s * s - s) * m[i] + (t * t * t - t) * m[j]);
}

}  // namespace

CubicInterpolant::CubicInterpolant(const SampledField& f) : grid_(f.grid), values_(f.values) {
  const std::size_t n = grid_.per_axis();
  const double h = grid_.spacing();
  if (grid_.dim() == 1) {
    second_ = spline_second_derivatives(values_, h);
    return;
  }
  second_.resize(values_.size());
  for (std::size_t i0 = 0; i0 < n; ++i0) {
    auto row = spline_second_derivatives(std::span<const cplx>(&values_[i0 * n], n), h);
    std::copy(row.begin(), row.end(), second_.begin() + static_cast<long>(i0 * n));
  }
}

cplx CubicInterpolant::operator()(const Point& x) const {
  const std::size_t n = grid_.per_axis();
  const double h = grid_.spacing();
  if (grid_.dim() == 1) return spline_eval(values_, second_, x[0], h, grid_.period());
  std::vector<cplx> column(n);
  for (std::size_t i0 = 0; i0 < n; ++i0)
    column[i0] = spline_eval(std::span<const cplx>(&values_[i0 * n], n),
                             std::span<const cplx>(&second_[i0 * n], n), x[1], h, grid_.period());
  auto m = spline_second_derivatives(column, h);
  return spline_eval(column, m, x[0], h, grid_.period());
}

std::vector<cplx> evaluate_offgrid(const SampledField& f, std::span<const Point> points, InterpMethod method) {
  std::vector<cplx> out;
  out.reserve(points.size());
  if (method == InterpMethod::trig) {
    TrigInterpolant interp(f);
    for (const auto& p : points) out.push_back(interp(p));
  } else {
    CubicInterpolant interp(f);
    for (const auto& p : points) out.push_back(interp(p));
  }
  return out;
}

}  // namespace atomlab
