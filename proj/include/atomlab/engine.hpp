#pragma once

// Uniform front end over the two norm engines (Fourier-side resolution of
// unity, local means).

#include <memory>
#include <string>

#include "atomlab/localmeans.hpp"
#include "atomlab/spectral.hpp"

namespace atomlab {

enum class EngineKind { fourier, means };

/// Parses "fourier" / "means"; throws ConfigError otherwise.
EngineKind parse_engine(const std::string& name);
std::string engine_name(EngineKind kind);

class NormEngine {
 public:
  static NormEngine fourier(const Grid& grid, ResolutionKind kind = ResolutionKind::standard);
  /// Local means with moment order N and support radius e.
  static NormEngine means(const Grid& grid, int N = 2, double e = 0.5);

  EngineKind kind() const noexcept { return kind_; }
  const Grid& grid() const noexcept { return grid_; }
  double besov(const SampledField& f, const SpaceParams& params) const;
  /// Throws BoundsError for p = infinity.
  double tl(const SampledField& f, const SpaceParams& params) const;

 private:
  NormEngine(const Grid& grid, EngineKind kind) : grid_(grid), kind_(kind) {}
  Grid grid_;
  EngineKind kind_;
  std::shared_ptr<const ResolutionOfUnity> res_;
  std::shared_ptr<const KernelPair> pair_;
};

}  // namespace atomlab
