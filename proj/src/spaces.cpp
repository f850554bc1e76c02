#include "atomlab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "atomlab/error.hpp"

namespace atomlab {

void validate(const SpaceParams& params) {
  if (!(params.p > 0.0)) throw BoundsError("integrability p must be positive");
  if (!(params.q > 0.0)) throw BoundsError("fine index q must be positive");
  if (params.n != 1 && params.n != 2) throw BoundsError("dimension must be 1 or 2");
  if (!(params.K >= 0.0) || !(params.L >= 0.0)) throw BoundsError("K and L must be nonnegative");
  if (!(params.d > 1.0) || params.d > kMaxOverlap) throw BoundsError("overlap d must lie in (1, 4]");
  if (!std::isfinite(params.s)) throw BoundsError("smoothness s must be finite");
}

CoeffKey reduce_key(int level, std::array<long, 2> index, int dim) {
  if (level < 0) throw BoundsError("coefficient level must be nonnegative");
  const long count = 1L << level;
  CoeffKey key{level, {0, 0}};
  for (int ax = 0; ax < dim; ++ax) {
    long m = index[ax] % count;
    if (m < 0) m += count;
    key.index[ax] = m;
  }
  return key;
}

void CoeffArray::set(int level, std::array<long, 2> index, cplx value) {
  entries[reduce_key(level, index, dim)] = value;
}

cplx CoeffArray::get(int level, std::array<long, 2> index) const {
  auto it = entries.find(reduce_key(level, index, dim));
  return it == entries.end() ? cplx{0.0, 0.0} : it->second;
}

int CoeffArray::max_level() const { return entries.empty() ? -1 : entries.rbegin()->first.level; }

HolderSplit holder_split(double s) {
  if (s <= 0.0) return {0, 0.0};
  const double whole = std::ceil(s) - 1.0;
  return {static_cast<int>(whole), s - whole};
}

double ell_q(std::span<const double> xs, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
  }
  double acc = 0.0;
  for (double x : xs) acc += std::pow(std::abs(x), q);
  return std::pow(acc, 1.0 / q);
}

double lp_norm(const SampledField& f, double p) {
  if (!(p > 0.0)) throw BoundsError("lp_norm requires p > 0");
  if (std::isinf(p)) return f.max_abs();
  double acc = 0.0;
  if (p == 2.0) {
    for (const auto& v : f.values) acc += std::norm(v);
  } else {
    for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
  }
  return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

double lip_seminorm(const SampledField& f, double sigma) {
  if (!(sigma > 0.0) || sigma > 1.0) throw BoundsError("Lipschitz exponent must lie in (0, 1]");
  const Grid& g = f.grid;
  const double h = g.spacing();
  const long half = static_cast<long>(g.per_axis() / 2);
  std::vector<std::array<long, 2>> directions{{1, 0}};
  if (g.dim() == 2) directions = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  double best = 0.0;
  for (long step = 1; step <= half; step *= 2) {
    for (const auto& dir : directions) {
      const long s0 = dir[0] * step;
      const long s1 = dir[1] * step;
      const double dist = h * std::sqrt(static_cast<double>(s0 * s0 + s1 * s1));
      if (dist > 0.5 * g.period() * (g.dim() == 2 ? std::sqrt(2.0) : 1.0) + 1e-12) continue;
      double osc = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i)
        osc = std::max(osc, std::abs(f.values[g.shifted(i, s0, s1)] - f.values[i]));
      best = std::max(best, osc / std::pow(dist, sigma));
    }
  }
  return best;
}

double holder_norm(const SampledField& f, double s, double dilation) {
  if (s < 0.0) throw BoundsError("Hoelder index must be nonnegative");
  if (s > kMaxHolderIndex) throw BoundsError("Hoelder index above differentiation cap 6");
  if (s == 0.0) return f.max_abs();
  const auto [whole, frac] = holder_split(s);
  double total = 0.0;
  for (int order = 0; order <= whole; ++order) {
    const double scale = std::pow(dilation, order);
    for (const auto& alpha : multi_indices(f.grid.dim(), order)) {
      const SampledField d = differentiate(f, alpha);
      total += scale * d.max_abs();
      if (order == whole) total += std::pow(dilation, s) * lip_seminorm(d, frac);
    }
  }
  return total;
}

std::pair<double, double> sigma_indices(double p, double q, int n) {
  if (!(p > 0.0) || !(q > 0.0)) throw BoundsError("sigma indices need p, q > 0");
  const double sp = n * std::max(1.0 / p - 1.0, 0.0);
  const double spq = n * std::max(1.0 / std::min(p, q) - 1.0, 0.0);
  return {sp, spq};
}

double bpq_norm(const CoeffArray& lambda, double p, double q) {
  if (!(p > 0.0) || !(q > 0.0)) throw BoundsError("b_{p,q} needs p, q > 0");
  std::vector<double> level_norms;
  std::vector<double> current;
  int level = -1;
  auto flush = [&] {
    if (!current.empty()) level_norms.push_back(ell_q(current, p));
    current.clear();
  };
  for (const auto& [key, value] : lambda.entries) {
    if (key.level != level) {
      flush();
      level = key.level;
    }
    current.push_back(std::abs(value));
  }
  flush();
  return ell_q(level_norms, q);
}

double fpq_norm(const CoeffArray& lambda, double p, double q, const Grid& grid) {
  if (!(p > 0.0) || !(q > 0.0)) throw BoundsError("f_{p,q} needs p, q > 0");
  if (lambda.max_level() > grid.depth() - 3)
    throw BoundsError("coefficient level " + std::to_string(lambda.max_level()) + " exceeds grid cap J-3");
  const int n = grid.dim();
  std::vector<double> acc(grid.size(), 0.0);
  const auto per_axis = static_cast<long>(grid.per_axis());
  for (const auto& [key, value] : lambda.entries) {
    const double chi = std::isinf(p) ? 1.0 : std::exp2(key.level * n / p);
    const double v = std::abs(value) * chi;
    DyadicCube cube{key.level, key.index, 1.0};
    const CubeGeometry geo = cube_geometry(cube, grid);
    for (std::size_t a = 0; a < geo.node_count[0]; ++a) {
      const long i0 = (geo.first_node[0] + static_cast<long>(a)) & (per_axis - 1);
      for (std::size_t b = 0; b < geo.node_count[1]; ++b) {
        const long i1 = n == 1 ? 0 : (geo.first_node[1] + static_cast<long>(b)) & (per_axis - 1);
        const std::size_t idx = grid.flat(static_cast<std::size_t>(i0), static_cast<std::size_t>(i1));
        if (std::isinf(q)) acc[idx] = std::max(acc[idx], v);
        else acc[idx] += std::pow(v, q);
      }
    }
  }
  SampledField g(grid);
  for (std::size_t i = 0; i < acc.size(); ++i) g.values[i] = std::isinf(q) ? acc[i] : std::pow(acc[i], 1.0 / q);
  return lp_norm(g, p);
}

HolderProduct holder_product(const SampledField& f, const SampledField& g, double s) {
  SampledField prod = pointwise_product(f, g);
  const double nf = holder_norm(f, s);
  const double ng = holder_norm(g, s);
  const double ratio = (nf == 0.0 || ng == 0.0) ? 0.0 : holder_norm(prod, s) / (nf * ng);
  return {std::move(prod), ratio};
}

}  // namespace atomlab
