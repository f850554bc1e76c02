#include "atomlab/battery.hpp"

#include <cmath>
#include <numbers>

#include "atomlab/rng.hpp"
#include "atomlab/spaces.hpp"

namespace atomlab {

HolderBattery::HolderBattery(const Grid& grid, int level, int count, std::uint64_t seed) : grid_(grid) {
  members_.push_back(SampledField::from_function(grid, [](const Point&) { return cplx{1.0, 0.0}; }));
  Rng rng(seed);
  const double base = std::ldexp(1.0, level) / grid.period();
  const long max_omega = std::min<long>(4, static_cast<long>(grid.per_axis() / 2) >> level);
  for (int i = 0; i < count; ++i) {
    const int terms = static_cast<int>(rng.integer(1, 3));
    struct Term {
      double a, w0, w1, phase;
    };
    std::vector<Term> ts;
    for (int t = 0; t < terms; ++t) {
      Term term{rng.uniform(-1.0, 1.0), static_cast<double>(rng.integer(0, max_omega)),
                grid.dim() == 2 ? static_cast<double>(rng.integer(0, max_omega)) : 0.0,
                rng.uniform(0.0, 2.0 * std::numbers::pi)};
      ts.push_back(term);
    }
    const double period = grid.period();
    members_.push_back(SampledField::from_function(grid, [&](const Point& x) {
      const double x0 = wrap_offset(x[0], period);
      const double x1 = wrap_offset(x[1], period);
      double v = 0.0;
      for (const auto& t : ts)
        v += t.a * std::cos(2.0 * std::numbers::pi * base * (t.w0 * x0 + t.w1 * x1) + t.phase);
      return cplx{v, 0.0};
    }));
  }
}

double HolderBattery::norm(std::size_t i, double order) const {
  std::lock_guard lock(mutex_);
  auto it = norms_.find(order);
  if (it == norms_.end()) {
    std::vector<double> ns;
    ns.reserve(members_.size());
    for (const auto& m : members_) ns.push_back(holder_norm(m, order));
    it = norms_.emplace(order, std::move(ns)).first;
  }
  return it->second[i];
}

cplx HolderBattery::pairing(std::size_t i, const SampledField& f, std::size_t center_node) const {
  const auto& psi = members_[i];
  const auto [c0, c1] = grid_.axis_index(center_node);
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f.values[k] == cplx{0.0, 0.0}) continue;
    acc += psi.values[grid_.shifted(k, -static_cast<long>(c0), -static_cast<long>(c1))] * f.values[k];
  }
  return acc * grid_.cell_volume();
}

}  // namespace atomlab
