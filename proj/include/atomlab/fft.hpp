#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace atomlab::fft {

using cplx = std::complex<double>;

/// Normalized forward transform: c_k = N^{-dim} * sum_i f_i exp(-2 pi i k.i / N),
/// so that f_i = sum_k c_k exp(+2 pi i k.i / N). Row-major layout for dim = 2.
std::vector<cplx> forward(std::span<const cplx> values, int dim, std::size_t per_axis);

/// Inverse of forward(): synthesizes samples from coefficients.
std::vector<cplx> inverse(std::span<const cplx> coeffs, int dim, std::size_t per_axis);

/// Signed mode number of storage index idx for an axis of length n.
inline long signed_mode(std::size_t idx, std::size_t n) {
  return idx < n / 2 ? static_cast<long>(idx) : static_cast<long>(idx) - static_cast<long>(n);
}

}  // namespace atomlab::fft
