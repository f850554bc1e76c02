#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

#include "atomlab/grid.hpp"

namespace atomlab {

/// Test functions for the generalized moment conditions: the constant 1 plus
/// random trigonometric polynomials whose frequencies are integer multiples of
/// 2^level, so that the battery at level nu is the dilate of the battery at
/// level 0. Members are centered at the origin; `pairing` translates them to a
/// grid-aligned center.
class HolderBattery {
 public:
  HolderBattery(const Grid& grid, int level, int count, std::uint64_t seed);

  std::size_t size() const noexcept { return members_.size(); }
  const SampledField& member(std::size_t i) const { return members_[i]; }
  /// ||psi_i | C^order||, cached per order.
  double norm(std::size_t i, double order) const;
  /// int psi_i(x - center) f(x) dx with center = node `center_node`.
  cplx pairing(std::size_t i, const SampledField& f, std::size_t center_node) const;

 private:
  Grid grid_;
  std::vector<SampledField> members_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::vector<double>> norms_;
};

}  // namespace atomlab
