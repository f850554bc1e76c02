#include "atomlab/localmeans.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "atomlab/battery.hpp"
#include "atomlab/error.hpp"
#include "atomlab/fft.hpp"
#include "atomlab/spectral.hpp"

namespace atomlab {
namespace {

using Poly = std::vector<double>;

double eval_poly(const Poly& p, double t) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Poly mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly add(Poly a, const Poly& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

Poly derive(const Poly& p) {
  if (p.size() <= 1) return {0.0};
  Poly r(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) r[i - 1] = static_cast<double>(i) * p[i];
  return r;
}

// B^{(r)}(t) = P_r(t) (1 - t^2)^{-2r} B(t) with B(t) = exp(-1/(1-t^2)).
std::vector<Poly> bump_derivative_polys(int max_order) {
  const Poly u{1.0, 0.0, -1.0};
  const Poly u2 = mul(u, u);
  std::vector<Poly> ps{{1.0}};
  for (int r = 0; r < max_order; ++r) {
    const Poly& p = ps.back();
    Poly next = mul(derive(p), u2);
    next = add(next, mul(mul(Poly{0.0, 4.0 * r}, u), p));
    next = add(next, mul(Poly{0.0, -2.0}, p));
    ps.push_back(next);
  }
  return ps;
}

double bump(double t) {
  const double u = 1.0 - t * t;
  return u <= 2e-3 ? 0.0 : std::exp(-1.0 / u);
}

double bump_derivative(const std::vector<Poly>& polys, int r, double t) {
  const double u = 1.0 - t * t;
  if (u <= 2e-3) return 0.0;
  return eval_poly(polys[static_cast<std::size_t>(r)], t) * std::pow(u, -2.0 * r) * std::exp(-1.0 / u);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Scaled radius of node x for a kernel at level j: z = 2^j * 2 x / e per axis.
std::array<double, 2> scaled_offset(const Grid& g, std::size_t node, int j, double e) {
  const Point x = g.node(node);
  const double scale = std::ldexp(2.0 / e, j);
  return {scale * wrap_offset(x[0], g.period()), g.dim() == 2 ? scale * wrap_offset(x[1], g.period()) : 0.0};
}

SampledField sampled_bump(const Grid& g, int j, double e) {
  SampledField b(g);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto z = scaled_offset(g, i, j, e);
    b.values[i] = bump(std::sqrt(z[0] * z[0] + z[1] * z[1]));
  }
  return b;
}

// Removes the discrete moments int z^beta k, |beta| < order, by subtracting a
// combination of z^gamma * B_j (same support).
void correct_moments(SampledField& kernel, const SampledField& bump_j, int order, int j, double e) {
  if (order <= 0) return;
  const Grid& g = kernel.grid;
  std::vector<MultiIndex> basis;
  for (int o = 0; o < order; ++o)
    for (const auto& a : multi_indices(g.dim(), o)) basis.push_back(a);
  const auto nb = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::VectorXd mom_re = Eigen::VectorXd::Zero(nb), mom_im = Eigen::VectorXd::Zero(nb);
  std::vector<double> mono(basis.size());
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const double b = bump_j.values[i].real();
    if (b == 0.0 && kernel.values[i] == cplx{0.0, 0.0}) continue;
    const auto z = scaled_offset(g, i, j, e);
    for (std::size_t a = 0; a < basis.size(); ++a)
      mono[a] = std::pow(z[0], basis[a][0]) * (g.dim() == 2 ? std::pow(z[1], basis[a][1]) : 1.0);
    for (Eigen::Index a = 0; a < nb; ++a) {
      mom_re[a] += mono[static_cast<std::size_t>(a)] * kernel.values[i].real();
      mom_im[a] += mono[static_cast<std::size_t>(a)] * kernel.values[i].imag();
      for (Eigen::Index c = 0; c < nb; ++c)
        gram(a, c) += mono[static_cast<std::size_t>(a)] * mono[static_cast<std::size_t>(c)] * b;
    }
  }
  const auto qr = gram.colPivHouseholderQr();
  const Eigen::VectorXd c_re = qr.solve(mom_re);
  const Eigen::VectorXd c_im = qr.solve(mom_im);
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const double b = bump_j.values[i].real();
    if (b == 0.0) continue;
    const auto z = scaled_offset(g, i, j, e);
    cplx corr{0.0, 0.0};
    for (std::size_t a = 0; a < basis.size(); ++a) {
      const double m = std::pow(z[0], basis[a][0]) * (g.dim() == 2 ? std::pow(z[1], basis[a][1]) : 1.0);
      corr += m * b * cplx(c_re[static_cast<Eigen::Index>(a)], c_im[static_cast<Eigen::Index>(a)]);
    }
    kernel.values[i] -= corr;
  }
}

// 2D: apply (a + |2 pi xi / P|^2)^{N/2} * scale in Fourier space.
SampledField laplace_power(const SampledField& f, double shift_sq, int half_order, double scale) {
  const Grid& g = f.grid;
  auto coeffs = fft::forward(f.values, g.dim(), g.per_axis());
  const auto xi = lattice_frequency_magnitudes(g);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * xi[k] / g.period();
    coeffs[k] *= scale * std::pow(shift_sq + w * w, half_order);
  }
  return SampledField(g, fft::inverse(coeffs, g.dim(), g.per_axis()));
}

}  // namespace

SampledField KernelPair::kernel(int j) const {
  if (j < 0) throw BoundsError("kernel level must be nonnegative");
  if (j > grid.depth() - 3) throw BoundsError("kernel level " + std::to_string(j) + " exceeds J-3");
  if (j == 0) return k0;
  const double e = support_radius;
  const int n = grid.dim();
  const SampledField bj = sampled_bump(grid, j, e);
  SampledField kj(grid);
  if (n == 1) {
    const auto polys = bump_derivative_polys(order);
    const double sign = order % 2 == 0 ? 1.0 : -1.0;
    const double amp = std::ldexp(normalization, j) * sign * std::pow(2.0 / e, order);
    for (std::size_t i = 0; i < kj.size(); ++i) {
      const auto z = scaled_offset(grid, i, j, e);
      kj.values[i] = amp * bump_derivative(polys, order, z[0]);
    }
  } else {
    const double scale = normalization * std::ldexp(1.0, 2 * j) * std::ldexp(1.0, -j * order);
    kj = laplace_power(bj, 0.0, order / 2, scale);
  }
  correct_moments(kj, bj, order, j, e);
  kj.support_hint = TorusBox{{0.0, 0.0}, {std::ldexp(0.5 * e, -j), n == 2 ? std::ldexp(0.5 * e, -j) : 0.0}};
  return kj;
}

KernelPair build_mean_kernels(int N, double e, const Grid& grid, double shift_factor) {
  if (N < 0 || N > kMaxMomentOrder) throw BoundsError("moment order N must lie in [0, 6]");
  if (!(e > 0.0) || e > 1.0) throw BoundsError("support radius e must lie in (0, 1]");
  if (grid.dim() == 2 && N % 2 == 1)
    throw HypothesisError("2D kernels are Laplacian iterates; odd moment order N is not supported");
  KernelPair pair{grid, N, e, shift_factor * 2.0 / e, 0.0, 1.0, SampledField(grid), SampledField(grid)};
  const double mu = pair.shift;
  const SampledField b0 = sampled_bump(grid, 0, e);
  const double bump_mass = quadrature(b0).real();
  pair.normalization = 1.0 / (std::pow(mu, N) * bump_mass);
  const double c = pair.normalization;
  const TorusBox box{{0.0, 0.0}, {0.5 * e, grid.dim() == 2 ? 0.5 * e : 0.0}};
  if (grid.dim() == 1) {
    const auto polys = bump_derivative_polys(N);
    for (std::size_t i = 0; i < pair.k.size(); ++i) {
      const double t = scaled_offset(grid, i, 0, e)[0];
      double kv = 0.0, k0v = 0.0;
      for (int r = 0; r <= N; ++r) {
        const double dr = std::pow(2.0 / e, r) * bump_derivative(polys, r, t);
        const double sign = r % 2 == 0 ? 1.0 : -1.0;
        k0v += binomial(N, r) * std::pow(mu, N - r) * sign * dr;
        if (r == N) kv = sign * dr;
      }
      pair.k.values[i] = c * kv;
      pair.k0.values[i] = c * k0v;
    }
  } else {
    pair.k = laplace_power(b0, 0.0, N / 2, c);
    pair.k0 = laplace_power(b0, mu * mu, N / 2, c);
  }
  correct_moments(pair.k, b0, N, 0, e);
  pair.k.support_hint = box;
  pair.k0.support_hint = box;

  // First zero of khat along the first axis.
  const auto coeffs = fft::forward(pair.k.values, grid.dim(), grid.per_axis());
  const std::size_t half = grid.per_axis() / 2;
  double peak = 0.0;
  for (std::size_t m = 1; m < half; ++m) peak = std::max(peak, std::abs(coeffs[grid.flat(m, 0)]));
  pair.eps_band = static_cast<double>(half);
  for (std::size_t m = 1; m < half; ++m) {
    if (std::abs(coeffs[grid.flat(m, 0)]) < 1e-8 * peak) {
      pair.eps_band = static_cast<double>(m);
      break;
    }
  }
  return pair;
}

SampledField convolve(const SampledField& kernel, const SampledField& f) {
  if (!(kernel.grid == f.grid)) throw BoundsError("convolution operands on different grids");
  const Grid& g = f.grid;
  auto a = fft::forward(kernel.values, g.dim(), g.per_axis());
  const auto b = fft::forward(f.values, g.dim(), g.per_axis());
  const double vol = g.dim() == 1 ? g.period() : g.period() * g.period();
  for (std::size_t k = 0; k < a.size(); ++k) a[k] *= b[k] * vol;
  return SampledField(g, fft::inverse(a, g.dim(), g.per_axis()));
}

int local_means_top_level(const Grid& grid) { return grid.depth() - 3; }

namespace {

void require_order_above_smoothness(const KernelPair& pair, const SpaceParams& params) {
  if (!(static_cast<double>(pair.order) > params.s))
    throw HypothesisError("local means need moment order N > s (N=" + std::to_string(pair.order) +
                          ", s=" + std::to_string(params.s) + ")");
}

}  // namespace

double besov_norm_means(const SampledField& f, const SpaceParams& params, const KernelPair& pair) {
  require_order_above_smoothness(pair, params);
  const double low = lp_norm(convolve(pair.k0, f), params.p);
  std::vector<double> terms;
  for (int j = 1; j <= local_means_top_level(f.grid); ++j)
    terms.push_back(std::exp2(j * params.s) * lp_norm(convolve(pair.kernel(j), f), params.p));
  return low + ell_q(terms, params.q);
}

double tl_norm_means(const SampledField& f, const SpaceParams& params, const KernelPair& pair) {
  require_order_above_smoothness(pair, params);
  if (std::isinf(params.p)) throw BoundsError("F^s_{p,q} requires p < infinity");
  const double low = lp_norm(convolve(pair.k0, f), params.p);
  const int top = local_means_top_level(f.grid);
  std::vector<SampledField> means;
  for (int j = 1; j <= top; ++j) means.push_back(convolve(pair.kernel(j), f));
  SampledField g(f.grid);
  std::vector<double> column(means.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < means.size(); ++j)
      column[j] = std::exp2(static_cast<double>(j + 1) * params.s) * std::abs(means[j].values[i]);
    g.values[i] = ell_q(column, params.q);
  }
  return low + lp_norm(g, params.p);
}

KernelFamily family_from_pair(const KernelPair& pair, int top_level, double smoothness) {
  KernelFamily fam{pair.grid, {}, smoothness, static_cast<double>(pair.order), 2.0 * pair.support_radius};
  for (int j = 0; j <= top_level; ++j) fam.kernels.push_back(pair.kernel(j));
  return fam;
}

KernelFamilyCertificate verify_kernel_family(const KernelFamily& family, double moment_order, int sample_count,
                                             double threshold, std::uint64_t seed) {
  KernelFamilyCertificate cert;
  const Grid& g = family.grid;
  const int n = g.dim();
  const int whole = moment_order > 0.0 ? holder_split(moment_order).whole : 0;
  for (std::size_t jj = 0; jj < family.kernels.size(); ++jj) {
    const int j = static_cast<int>(jj);
    const SampledField& kj = family.kernels[jj];
    const double c2 = holder_norm(kj, family.smoothness, std::ldexp(1.0, -j)) / std::exp2(j * n);
    const double scale = std::exp2(-j * moment_order);

    double c3 = 0.0;
    for (int o = 0; o <= whole; ++o) {
      for (const auto& beta : multi_indices(n, o)) {
        cplx mom{0.0, 0.0};
        for (std::size_t i = 0; i < kj.size(); ++i) {
          const Point x = g.node(i);
          const double x0 = wrap_offset(x[0], g.period());
          const double x1 = n == 2 ? wrap_offset(x[1], g.period()) : 1.0;
          mom += std::pow(x0, beta[0]) * (n == 2 ? std::pow(x1, beta[1]) : 1.0) * kj.values[i];
        }
        c3 = std::max(c3, std::abs(mom * g.cell_volume()) / scale);
      }
    }
    const HolderBattery battery(g, std::min(j, g.depth() - 3), sample_count, seed);
    for (std::size_t b = 0; b < battery.size(); ++b) {
      const double norm = battery.norm(b, moment_order);
      if (norm <= 0.0) continue;
      c3 = std::max(c3, std::abs(battery.pairing(b, kj, 0)) / (scale * norm));
    }
    const double hw = 0.5 * family.overlap * std::ldexp(g.period(), -j);
    SampledField probe = kj;
    probe.support_hint = TorusBox{{0.0, 0.0}, {hw, n == 2 ? hw : 0.0}};
    if (!probe.respects_support_hint(1e-12)) cert.support_ok = false;

    cert.smooth_constants.push_back(c2);
    cert.moment_constants.push_back(c3);
    cert.smooth_max = std::max(cert.smooth_max, c2);
    cert.moment_max = std::max(cert.moment_max, c3);
  }
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 1; j < cert.moment_constants.size(); ++j)
    if (cert.moment_constants[j] > 0.0) pts.emplace_back(static_cast<double>(j), std::log2(cert.moment_constants[j]));
  if (pts.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0.0, sxx = 0.0;
    for (auto [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    cert.growth_exponent = sxy / sxx;
  }
  cert.pass = cert.support_ok && cert.smooth_max <= threshold && cert.moment_max <= threshold;
  return cert;
}

}  // namespace atomlab
