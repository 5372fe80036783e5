// Minimal power-of-two complex FFT used by the spectral transforms.
// Self-contained so that transforms stay deterministic and thread-safe
// (no planner state, no global caches).

#pragma once

#include <complex>
#include <vector>

namespace sqg {

using cplx = std::complex<double>;

// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

// In-place radix-2 FFT of length n = 2^k.
// sign = -1: forward (X[r] = sum_j x[j] e^{-2*pi*i*j*r/n}), sign = +1: inverse
// (no 1/n normalisation applied).
void fft_pow2(cplx* data, std::size_t n, int sign);

// 2-D transform of an n-by-n row-major array, both axes, same sign convention.
void fft2_pow2(cplx* data, std::size_t n, int sign);

}  // namespace sqg
