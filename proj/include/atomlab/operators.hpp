#pragma once

// Pointwise multiplication and composition with diffeomorphisms of the torus,
// with the supporting estimates: product and atom multiplication, bi-Lipschitz
// geometry, L_p change of variables, Hoelder composition and atom transport.

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "atomlab/atoms.hpp"
#include "atomlab/engine.hpp"

namespace atomlab {

// ---------------------------------------------------------------- multiply

struct MultiplyReport {
  double rho = 0.0;
  double phi_norm = 0.0;  // ||phi | C^rho||
  double f_besov = 0.0, g_besov = 0.0, ratio_besov = 0.0;
  std::optional<double> f_tl, g_tl, ratio_tl;  // absent for p = infinity
  bool rho_ok_besov = false;  // rho > max(s, sigma_p - s)
  bool rho_ok_tl = false;     // rho > max(s, sigma_{p,q} - s)
};

struct Multiplied {
  SampledField g;
  MultiplyReport report;
};

Multiplied multiply(const SampledField& phi, const SampledField& f, const SpaceParams& params, double rho,
                    const NormEngine& engine);

struct AtomProduct {
  AtomSpec atom;
  AtomCertificate certificate;
  AtomCertificate input_certificate;
  double phi_norm = 0.0;
  double inflation = 0.0;  // output max constant / input max constant (0 when the input vanishes)
  bool rho_ok = false;     // rho >= max(K, L)
};

AtomProduct multiply_atom(const SampledField& phi, const AtomSpec& atom, double rho,
                          const ValidationOptions& options = {});

// ---------------------------------------------------------------- diffeomorphisms

using Jacobian = std::array<double, 4>;  // row-major, (0,1,1,1 unused) entries in 1D

/// Periodic displacement eta with its Jacobian; phi = x + alpha * eta.
struct DiffeoProfile {
  std::function<Point(const Point&)> eta;
  std::function<Jacobian(const Point&)> jacobian;
};

/// 1D: eta = P/(2 pi) sin(2 pi x / P).
/// 2D: eta_i = P/(2 pi) (2/3 sin(2 pi x_i / P) + 1/3 sin(2 pi (x_0 + x_1) / P)).
DiffeoProfile default_profile(const Grid& grid);

/// Profile from sampled components (trigonometric interpolation, spectral Jacobian).
DiffeoProfile sampled_profile(const SampledField& eta0, const std::optional<SampledField>& eta1 = std::nullopt);

enum class DiffeoKind { identity, translation, perturbation };

std::string diffeo_kind_name(DiffeoKind kind);
DiffeoKind parse_diffeo_kind(const std::string& name);

class Diffeo {
 public:
  const Grid& grid() const noexcept { return grid_; }
  DiffeoKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  const Point& shift() const noexcept { return shift_; }
  double rho() const noexcept { return rho_; }

  Point forward(const Point& x) const;
  Jacobian jacobian(const Point& x) const;
  /// phi^{-1} at grid node i (Newton solution).
  Point inverse_at_node(std::size_t i) const;
  /// phi^{-1} at an arbitrary point (Newton from the nearest node).
  Point inverse(const Point& y) const;

  double c1 = 1.0, c2 = 1.0;                  // derivative bounds
  double sampled_c1 = 1.0, sampled_c2 = 1.0;  // shell-sampled ratios
  double jacobian_bound = 1.0;                // inf |det J|
  double holder_budget = 0.0;                 // sum_ij ||d phi_i / d x_j | C^{rho-1}||
  double inverse_budget = 0.0;                // same for phi^{-1}
  double inverse_residual = 0.0;              // max |phi(phi^{-1}(y_i)) - y_i|
  int bisection_fallbacks = 0;

  friend Diffeo make_diffeo(const Grid&, DiffeoKind, double, const std::optional<DiffeoProfile>&, Point, double);

 private:
  Grid grid_{1, 4};
  DiffeoKind kind_ = DiffeoKind::identity;
  double alpha_ = 0.0;
  Point shift_{0.0, 0.0};
  double rho_ = 1.0;
  std::shared_ptr<const DiffeoProfile> profile_;
  std::vector<Point> inverse_displacement_;  // phi^{-1}(y_i) - y_i
};

/// kind = perturbation requires max_x ||alpha J(eta)(x)||_inf <= 0.5 (HypothesisError
/// otherwise); kind = translation shifts by `shift`. rho >= 1.
Diffeo make_diffeo(const Grid& grid, DiffeoKind kind, double alpha = 0.0,
                   const std::optional<DiffeoProfile>& profile = std::nullopt, Point shift = {0.0, 0.0},
                   double rho = 2.0);

/// outer o inner as a perturbation with alpha = 1; throws like make_diffeo.
Diffeo compose_diffeos(const Diffeo& outer, const Diffeo& inner);

// ---------------------------------------------------------------- composition

struct ComposeReport {
  double f_besov = 0.0, g_besov = 0.0, ratio_besov = 0.0;
  std::optional<double> f_tl, g_tl, ratio_tl;
  double top_band_fraction = 0.0;  // energy of g in the last octave
  bool aliasing_warning = false;   // top_band_fraction > 1%
  bool rho_ok = false;             // rho > max(s, 1 + sigma_p - s)
};

struct Composed {
  SampledField g;
  ComposeReport report;
};

/// Samples f o phi on the grid nodes.
SampledField pullback(const SampledField& f, const Diffeo& phi);
/// Samples f o phi^{-1} on the grid nodes.
SampledField pushforward(const SampledField& f, const Diffeo& phi);

Composed compose(const SampledField& f, const Diffeo& phi, const SpaceParams& params, const NormEngine& engine);

struct ChangeOfVariablesReport {
  double p = 2.0;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;  // ||f o phi||_p, ||f||_p
  double jacobian_limit = 0.0;               // sup |det J(phi^{-1})|^{1/p}
  double max_box_ratio = 0.0;                // max mass(phi^{-1}(A)) / mass(A)
  double box_limit = 0.0;                    // (1/c1)^n
  int boxes = 0;
};

ChangeOfVariablesReport lp_change_of_variables(const SampledField& f, const Diffeo& phi, double p);

struct HolderComposeReport {
  double s = 0.0;
  double f_norm = 0.0, g_norm = 0.0, ratio = 0.0;
  bool rho_ok = false;  // max(1, s) <= rho
};

HolderComposeReport holder_compose(const SampledField& f, const Diffeo& phi, double s);

// ---------------------------------------------------------------- transport

struct TransportPlan {
  std::vector<std::vector<std::size_t>> families;  // indices into the atom list
  std::vector<std::array<long, 2>> relabel;        // Phi(m) per atom
  int M = 0;
  double d_prime = 0.0;
  int volume_bound = 0;  // ceil((c2/c1 + 1)^n)
  bool injective = true; // exhaustive pairwise check per family
};

struct Transported {
  TransportPlan plan;
  std::vector<AtomSpec> atoms;
  std::vector<AtomCertificate> certificates;
  double target_constant = 0.0;  // B_phi * max input constant
  bool all_pass = false;
  bool rho_ok = false;
  std::string L_route;  // "moment" or "L0"
};

inline constexpr int kMaxFamilies = 64;

/// Throws NumericError when more than 64 families are needed.
Transported transport_atoms(const std::vector<AtomSpec>& atoms, const Diffeo& phi,
                            const ValidationOptions& options = {});

}  // namespace atomlab
