#include "sqg/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace sqg {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_pow2(cplx* data, std::size_t n, int sign) {
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: length must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    const double two_pi = 2.0 * M_PI;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * two_pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                cplx u = data[i + j];
                cplx v = data[i + j + len / 2] * w;
                data[i + j] = u + v;
                data[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

void fft2_pow2(cplx* data, std::size_t n, int sign) {
    for (std::size_t r = 0; r < n; ++r) fft_pow2(data + r * n, n, sign);
    std::vector<cplx> col(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = data[r * n + c];
        fft_pow2(col.data(), n, sign);
        for (std::size_t r = 0; r < n; ++r) data[r * n + c] = col[r];
    }
}

}  // namespace sqg
