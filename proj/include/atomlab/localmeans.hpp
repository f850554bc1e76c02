#pragma once

// Compactly supported local-mean kernels with vanishing moments, the
// local-means quasi-norms and a checker for the generalized kernel-family
// conditions (smoothness bound and moment bound against C^N test functions).

#include <cstdint>
#include <vector>

#include "atomlab/grid.hpp"
#include "atomlab/spaces.hpp"

namespace atomlab {

inline constexpr int kMaxMomentOrder = 6;
/// Default low-frequency shift of k0 = (mu - D)^N bump, in units of 2/e.
inline constexpr double kDefaultKernelShift = 0.75;

/// Kernel pair (k0, k). In 1D k = c (-D)^N B and k0 = c (mu - D)^N B for the
/// bump B(x) = exp(-1/(1 - (2x/e)^2)); in 2D the radial bump with
/// k = c (-Lap)^{N/2} B and k0 = c (mu^2 - Lap)^{N/2} B. The constant c
/// normalizes int k0 = 1. Both are supported in e * Q_{0,0}.
struct KernelPair {
  Grid grid;
  int order = 0;               // N: int x^beta k = 0 for |beta| < N
  double support_radius = 0.5; // e
  double shift = 0.0;          // mu
  double eps_band = 0.0;       // first lattice |xi| > 0 where |khat| drops below 1e-8 max
  double normalization = 1.0;  // c
  SampledField k0;
  SampledField k;

  /// k_0 for j = 0, 2^{jn} k(2^j .) for j >= 1 (moment-corrected on the grid).
  SampledField kernel(int j) const;
};

/// Throws BoundsError for N > 6 or e outside (0, 1], HypothesisError for odd N in 2D.
KernelPair build_mean_kernels(int N, double e, const Grid& grid,
                              double shift_factor = kDefaultKernelShift);

/// Circular convolution (k * f)(x) = int k(y) f(x - y) dy via FFT.
SampledField convolve(const SampledField& kernel, const SampledField& f);

/// Largest j used by the local-means norms on `grid` (J - 3).
int local_means_top_level(const Grid& grid);

/// Local-means B^s_{p,q} quasi-norm; requires N > s.
double besov_norm_means(const SampledField& f, const SpaceParams& params, const KernelPair& pair);
/// Local-means F^s_{p,q} quasi-norm; requires N > s and p < infinity.
double tl_norm_means(const SampledField& f, const SpaceParams& params, const KernelPair& pair);

struct KernelFamily {
  Grid grid;
  std::vector<SampledField> kernels;  // index j
  double smoothness = 0.0;            // M
  double moments = 0.0;               // N
  double overlap = 2.0;               // support factor c
};

KernelFamily family_from_pair(const KernelPair& pair, int top_level, double smoothness);

struct KernelFamilyCertificate {
  std::vector<double> smooth_constants;  // per j: ||k_j(2^-j .)|C^M|| / 2^{jn}
  std::vector<double> moment_constants;  // per j: lower bound of the C^N moment constant
  double smooth_max = 0.0;
  double moment_max = 0.0;
  double growth_exponent = 0.0;  // least-squares slope of log2(moment constant) over j >= 1
  bool support_ok = true;
  bool pass = false;
};

/// Minimal empirical constants of the family for test order N = `moment_order`.
/// The moment constant is a lower bound over monomials x^beta (|beta| <= floor N)
/// plus `sample_count` random trigonometric test functions.
KernelFamilyCertificate verify_kernel_family(const KernelFamily& family, double moment_order,
                                             int sample_count, double threshold = kInf,
                                             std::uint64_t seed = 17);

}  // namespace atomlab
