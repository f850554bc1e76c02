#pragma once

// Smooth dyadic resolution of unity on the discrete frequency lattice and the
// Fourier-analytic B^s_{p,q} / F^s_{p,q} quasi-norms.
//
// Frequencies are measured in units of 2*pi/period, so lattice mode k has
// |xi| = |k| and block j >= 1 lives on 2^{j-1} <= |xi| <= 2^{j+1}.

#include <vector>

#include "atomlab/grid.hpp"
#include "atomlab/spaces.hpp"

namespace atomlab {

enum class ResolutionKind { standard, perturbed };

/// Cut-off profile: 1 on [0, 1], 0 on [2, inf), C-infinity in between.
double resolution_profile(double t, ResolutionKind kind);

class ResolutionOfUnity {
 public:
  ResolutionOfUnity(const Grid& grid, ResolutionKind kind);

  const Grid& grid() const noexcept { return grid_; }
  ResolutionKind kind() const noexcept { return kind_; }
  /// Highest block, J - 2. Block j_max absorbs every frequency above 2^{j_max - 1}.
  int j_max() const noexcept { return j_max_; }
  /// Block multiplier phi_j at continuous frequency magnitude |xi|.
  double multiplier(int j, double xi_abs) const;
  /// phi_j sampled on the lattice, FFT storage order.
  const std::vector<double>& block(int j) const;

 private:
  Grid grid_;
  ResolutionKind kind_;
  int j_max_;
  std::vector<std::vector<double>> blocks_;
};

/// |xi| of every lattice frequency in FFT storage order.
std::vector<double> lattice_frequency_magnitudes(const Grid& grid);

SampledField band_project(const SampledField& f, int j, const ResolutionOfUnity& res);

/// All band projections j = 0..j_max from one forward transform.
std::vector<SampledField> band_decomposition(const SampledField& f, const ResolutionOfUnity& res);

/// ||band_j f | L_p|| for j = 0..j_max.
std::vector<double> band_lp_norms(const SampledField& f, double p, const ResolutionOfUnity& res);

/// (sum_j 2^{jsq} ||(phi_j fhat)^vee | L_p||^q)^{1/q}, truncated at j_max.
double besov_norm_fourier(const SampledField& f, const SpaceParams& params, const ResolutionOfUnity& res);

/// || (sum_j 2^{jsq} |(phi_j fhat)^vee|^q)^{1/q} | L_p ||; p = infinity rejected.
double tl_norm_fourier(const SampledField& f, const SpaceParams& params, const ResolutionOfUnity& res);

}  // namespace atomlab
