#pragma once

// Elementary (quasi-)norms: L_p, Lipschitz and Hoelder norms on sampled
// fields, the sequence spaces b_{p,q} / f_{p,q}, and the index helpers.

#include <array>
#include <complex>
#include <limits>
#include <map>
#include <span>
#include <utility>

#include "atomlab/grid.hpp"

namespace atomlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kMaxHolderIndex = 6.0;

/// (s, p, q, n, K, L, d). p and q may be +infinity.
struct SpaceParams {
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;
  int n = 1;
  double K = 0.0;
  double L = 0.0;
  double d = 2.0;

  bool operator==(const SpaceParams&) const = default;
};

/// Throws BoundsError on p, q <= 0, K or L < 0, d outside (1, 4], n not 1/2.
void validate(const SpaceParams& params);

struct CoeffKey {
  int level = 0;
  std::array<long, 2> index{0, 0};

  auto operator<=>(const CoeffKey&) const = default;
};

/// Finitely supported coefficient sequence lambda_{nu,m}; iteration order is
/// nu ascending, then m lexicographic.
struct CoeffArray {
  int dim = 1;
  std::map<CoeffKey, cplx> entries;

  /// Stores lambda at (level, index mod 2^level).
  void set(int level, std::array<long, 2> index, cplx value);
  cplx get(int level, std::array<long, 2> index) const;
  int max_level() const;  // -1 when empty
  bool empty() const { return entries.empty(); }
};

CoeffKey reduce_key(int level, std::array<long, 2> index, int dim);

/// Split s = whole + frac with frac in (0, 1]; for s = 0 returns {0, 0}.
struct HolderSplit {
  int whole;
  double frac;
};
HolderSplit holder_split(double s);

/// (sum |x|^q)^{1/q}, or max for q = infinity.
double ell_q(std::span<const double> xs, double q);

double lp_norm(const SampledField& f, double p);

/// Maximum of |f(x) - f(y)| / |x - y|^sigma over dyadic offset shells
/// |x - y| in {h, 2h, 4h, ...} <= period / 2 along the axes (and diagonals in 2D).
double lip_seminorm(const SampledField& f, double sigma);

/// Norm of f(dilation * .) in C^s, computed on the native grid through the
/// exact scaling identities (derivatives pick up dilation^|alpha|, the
/// Lipschitz part dilation^s). dilation = 1 gives the plain Hoelder norm.
double holder_norm(const SampledField& f, double s, double dilation = 1.0);

/// (sigma_p, sigma_{p,q}).
std::pair<double, double> sigma_indices(double p, double q, int n);

double bpq_norm(const CoeffArray& lambda, double p, double q);

/// f_{p,q} quasi-norm with L_p-normalized indicators of the d = 1 cubes,
/// evaluated on `grid`. Requires max_level <= J - 3.
double fpq_norm(const CoeffArray& lambda, double p, double q, const Grid& grid);

struct HolderProduct {
  SampledField product;
  double ratio;  // ||fg|C^s|| / (||f|C^s|| ||g|C^s||), 0 if either factor vanishes
};

HolderProduct holder_product(const SampledField& f, const SampledField& g, double s);

}  // namespace atomlab
