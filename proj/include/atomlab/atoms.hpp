#pragma once

// Generalized (s,p)_{K,L}-atoms: validation against the support, Hoelder and
// moment conditions, constructors, dilation, kernels as atoms, synthesis,
// a Calderon-type analysis operator and the truncated convergence bound.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "atomlab/grid.hpp"
#include "atomlab/localmeans.hpp"
#include "atomlab/spaces.hpp"

namespace atomlab {

using PointFunction = std::function<cplx(const Point&)>;

struct AtomSpec {
  SampledField field;
  DyadicCube cube;
  SpaceParams params;
  /// Optional closed form of the sampled field, used for exact off-grid evaluation.
  std::shared_ptr<const PointFunction> exact;
};

struct AtomCertificate {
  DyadicCube cube;
  bool C_support = true;
  double C_smooth = 0.0;
  double C_moment_poly = 0.0;
  double C_moment_rand = 0.0;
  double kappa = 0.0;
  bool pass = false;
  SpaceParams params;

  double max_constant() const;
};

/// s + L + n(1 - 1/p).
double kappa(const SpaceParams& params);

struct ValidationOptions {
  int battery_count = 32;
  std::uint64_t battery_seed = 29;
  double target_C = 1.0 + 1e-6;
  double support_tol = 1e-12;
};

/// Throws BoundsError for level > J - 3 or K above the differentiation cap.
AtomCertificate validate_atom(const AtomSpec& atom, const ValidationOptions& options = {});

enum class AtomTemplate { bump, oscillating };

/// Template supported in Q_{level,index}, normalized to certificate constant 1,
/// with moments of degree < moment_order removed. Throws BoundsError for
/// moment_order > 4.
AtomSpec make_atom(const Grid& grid, int level, std::array<long, 2> index, const SpaceParams& params,
                   AtomTemplate shape, int moment_order, const ValidationOptions& options = {});

/// 2^{j(s-n/p)} a(2^{-j} .), located at Q_{level-j, index}. Requires j <= level.
AtomSpec dilate_atom(const AtomSpec& atom, int j);

/// 2^{-j(s+n(1-1/p))} k_j located at Q_{j,0}. Requires params.L <= N + 1.
AtomSpec kernel_as_atom(const KernelPair& pair, int j, const SpaceParams& params);

using AtomFactory = std::function<AtomSpec(int level, std::array<long, 2> index)>;

enum class SynthesisMode { strict, lenient };

struct Synthesis {
  SampledField field;
  std::vector<AtomCertificate> certificates;  // coefficient order
};

/// sum lambda_{nu,m} a_{nu,m}; strict mode throws HypothesisError on a failing certificate.
Synthesis synthesize(const Grid& grid, const CoeffArray& lambda, const AtomFactory& factory,
                     SynthesisMode mode = SynthesisMode::strict, const ValidationOptions& options = {});

struct Analysis {
  CoeffArray coefficients;
  std::map<CoeffKey, AtomSpec> atoms;
  SampledField reconstruction;
  double band_error = 0.0;       // ||recon - P f||_2 / ||P f||_2, P = resolved-band projection
  double resolved_fraction = 0.0; // ||P f||_2 / ||f||_2
};

/// Discrete Calderon analysis with the dual multipliers of k_0 .. k_depth.
/// Throws BoundsError for depth > J - 3.
Analysis analyze(const SampledField& f, int depth, const KernelPair& pair, const SpaceParams& params,
                 const ValidationOptions& options = {});

struct ConvergenceReport {
  double sum = 0.0;             // sum |lambda int a psi|
  double atom_constant = 0.0;   // C_atom
  double test_norm = 0.0;       // ||psi | C^L||
  double level_sum = 0.0;       // sum_nu 2^{-nu (kappa - n(1-1/p)_+)}
  double bound_constant = 0.0;  // C' = C_atom * test_norm * level_sum
  double b_p_inf = 0.0;
  bool hypothesis_ok = true;    // L > sigma_p - s
  bool holds = true;            // sum <= C' * b_p_inf
};

ConvergenceReport convergence_bound(const CoeffArray& lambda, const SpaceParams& params,
                                    const AtomFactory& factory, const SampledField& test_fn,
                                    const ValidationOptions& options = {});

}  // namespace atomlab
