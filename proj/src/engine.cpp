#include "atomlab/engine.hpp"

#include "atomlab/error.hpp"

namespace atomlab {

EngineKind parse_engine(const std::string& name) {
  if (name == "fourier") return EngineKind::fourier;
  if (name == "means") return EngineKind::means;
  throw ConfigError("unknown norm engine '" + name + "' (expected fourier or means)");
}

std::string engine_name(EngineKind kind) { return kind == EngineKind::fourier ? "fourier" : "means"; }

NormEngine NormEngine::fourier(const Grid& grid, ResolutionKind kind) {
  NormEngine e(grid, EngineKind::fourier);
  e.res_ = std::make_shared<const ResolutionOfUnity>(grid, kind);
  return e;
}

NormEngine NormEngine::means(const Grid& grid, int N, double e) {
  NormEngine out(grid, EngineKind::means);
  out.pair_ = std::make_shared<const KernelPair>(build_mean_kernels(N, e, grid));
  return out;
}

double NormEngine::besov(const SampledField& f, const SpaceParams& params) const {
  return kind_ == EngineKind::fourier ? besov_norm_fourier(f, params, *res_) : besov_norm_means(f, params, *pair_);
}

double NormEngine::tl(const SampledField& f, const SpaceParams& params) const {
  return kind_ == EngineKind::fourier ? tl_norm_fourier(f, params, *res_) : tl_norm_means(f, params, *pair_);
}

}  // namespace atomlab
