#include "atomlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace atomlab::fft {
namespace {

// The FFTW planner is not thread-safe; execution with the new-array interface is.
std::mutex planner_mutex;

fftw_plan plan_for(int dim, std::size_t per_axis, int sign) {
  static std::map<std::tuple<int, std::size_t, int>, fftw_plan> cache;
  std::lock_guard lock(planner_mutex);
  const auto key = std::make_tuple(dim, per_axis, sign);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const std::size_t total = dim == 1 ? per_axis : per_axis * per_axis;
  std::vector<cplx> scratch(total);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const int n = static_cast<int>(per_axis);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = dim == 1 ? fftw_plan_dft_1d(n, buf, buf, sign, flags)
                            : fftw_plan_dft_2d(n, n, buf, buf, sign, flags);
  cache.emplace(key, plan);
  return plan;
}

std::vector<cplx> run(std::span<const cplx> in, int dim, std::size_t per_axis, int sign) {
  std::vector<cplx> out(in.begin(), in.end());
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan_for(dim, per_axis, sign), buf, buf);
  return out;
}

}  // namespace

std::vector<cplx> forward(std::span<const cplx> values, int dim, std::size_t per_axis) {
  auto out = run(values, dim, per_axis, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<cplx> inverse(std::span<const cplx> coeffs, int dim, std::size_t per_axis) {
  return run(coeffs, dim, per_axis, FFTW_BACKWARD);
}

}  // namespace atomlab::fft
