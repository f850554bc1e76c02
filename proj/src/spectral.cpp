#include "atomlab/spectral.hpp"

#include <cmath>
#include <string>

#include "atomlab/error.hpp"
#include "atomlab/fft.hpp"

namespace atomlab {
namespace {

// exp(-1/u) / (exp(-1/u) + exp(-1/(1-u))): smooth step from 0 (u <= 0) to 1 (u >= 1).
double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

}  // namespace

double resolution_profile(double t, ResolutionKind kind) {
  t = std::abs(t);
  if (kind == ResolutionKind::standard) return 1.0 - smooth_step(t - 1.0);
  // Steeper transition on [1.15, 1.85].
  return 1.0 - smooth_step((t - 1.15) / 0.7);
}

std::vector<double> lattice_frequency_magnitudes(const Grid& grid) {
  const std::size_t n = grid.per_axis();
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto [i0, i1] = grid.axis_index(k);
    const double k0 = static_cast<double>(fft::signed_mode(i0, n));
    const double k1 = grid.dim() == 2 ? static_cast<double>(fft::signed_mode(i1, n)) : 0.0;
    out[k] = std::sqrt(k0 * k0 + k1 * k1);
  }
  return out;
}

ResolutionOfUnity::ResolutionOfUnity(const Grid& grid, ResolutionKind kind)
    : grid_(grid), kind_(kind), j_max_(grid.depth() - 2) {
  const auto xi = lattice_frequency_magnitudes(grid);
  blocks_.resize(static_cast<std::size_t>(j_max_) + 1);
  for (int j = 0; j <= j_max_; ++j) {
    auto& b = blocks_[static_cast<std::size_t>(j)];
    b.resize(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) b[k] = multiplier(j, xi[k]);
  }
}

double ResolutionOfUnity::multiplier(int j, double xi_abs) const {
  if (j < 0 || j > j_max_) throw BoundsError("block index " + std::to_string(j) + " out of range");
  auto psi = [&](double t) { return resolution_profile(t, kind_); };
  if (j == 0) return j_max_ == 0 ? 1.0 : psi(xi_abs);
  if (j == j_max_) return 1.0 - psi(std::ldexp(xi_abs, -(j - 1)));
  return psi(std::ldexp(xi_abs, -j)) - psi(std::ldexp(xi_abs, -(j - 1)));
}

const std::vector<double>& ResolutionOfUnity::block(int j) const {
  if (j < 0 || j > j_max_) throw BoundsError("block index " + std::to_string(j) + " out of range");
  return blocks_[static_cast<std::size_t>(j)];
}

namespace {

SampledField project_coeffs(const std::vector<cplx>& coeffs, const std::vector<double>& mult, const Grid& g) {
  std::vector<cplx> c(coeffs.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = coeffs[k] * mult[k];
  return SampledField(g, fft::inverse(c, g.dim(), g.per_axis()));
}

}  // namespace

SampledField band_project(const SampledField& f, int j, const ResolutionOfUnity& res) {
  if (!(f.grid == res.grid())) throw BoundsError("field and resolution on different grids");
  const auto& mult = res.block(j);
  return project_coeffs(fft::forward(f.values, f.grid.dim(), f.grid.per_axis()), mult, f.grid);
}

std::vector<SampledField> band_decomposition(const SampledField& f, const ResolutionOfUnity& res) {
  if (!(f.grid == res.grid())) throw BoundsError("field and resolution on different grids");
  const auto coeffs = fft::forward(f.values, f.grid.dim(), f.grid.per_axis());
  std::vector<SampledField> out;
  out.reserve(static_cast<std::size_t>(res.j_max()) + 1);
  for (int j = 0; j <= res.j_max(); ++j) out.push_back(project_coeffs(coeffs, res.block(j), f.grid));
  return out;
}

std::vector<double> band_lp_norms(const SampledField& f, double p, const ResolutionOfUnity& res) {
  std::vector<double> out;
  for (const auto& band : band_decomposition(f, res)) out.push_back(lp_norm(band, p));
  return out;
}

double besov_norm_fourier(const SampledField& f, const SpaceParams& params, const ResolutionOfUnity& res) {
  auto norms = band_lp_norms(f, params.p, res);
  for (std::size_t j = 0; j < norms.size(); ++j) norms[j] *= std::exp2(static_cast<double>(j) * params.s);
  return ell_q(norms, params.q);
}

double tl_norm_fourier(const SampledField& f, const SpaceParams& params, const ResolutionOfUnity& res) {
  if (std::isinf(params.p)) throw BoundsError("F^s_{p,q} requires p < infinity");
  const auto bands = band_decomposition(f, res);
  SampledField g(f.grid);
  std::vector<double> column(bands.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < bands.size(); ++j)
      column[j] = std::exp2(static_cast<double>(j) * params.s) * std::abs(bands[j].values[i]);
    g.values[i] = ell_q(column, params.q);
  }
  return lp_norm(g, params.p);
}

}  // namespace atomlab
