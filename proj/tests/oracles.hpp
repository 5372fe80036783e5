// Test-only oracles: direct trigonometric evaluation and grid quadrature,
// kept independent of the FFT transform path they are used to check.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "sqg/field.hpp"

namespace sqg::testing {

// f(x) by direct summation over the stored modes at x = (j1/n, j2/n).
inline std::vector<double> eval_direct(const SpectralField& f, std::size_t n) {
    std::vector<double> out(n * n, 0.0);
    const auto& t = f.table();
    for (std::size_t i = 0; i < t.size(); ++i) {
        ModeIndex k = t.mode(i);
        cplx c = f.coeffs()[i];
        for (std::size_t a = 0; a < n; ++a) {
            double x1 = static_cast<double>(a) / n;
            for (std::size_t b = 0; b < n; ++b) {
                double x2 = static_cast<double>(b) / n;
                double ph = 2.0 * M_PI * (k.k1 * x1 + k.k2 * x2);
                out[a * n + b] += 2.0 * (c.real() * std::cos(ph) - c.imag() * std::sin(ph));
            }
        }
    }
    return out;
}

// Torus quadrature of a product of grid samples; exact for trigonometric
// polynomials of degree below the grid size.
inline double quad_inner(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) s += a[i] * b[i];
    return s / (static_cast<double>(n) * static_cast<double>(n));
}

// Random band-limited field with |k|^{-decay} coefficient falloff.
inline SpectralField random_field(int kmax, std::mt19937_64& rng, double decay = 1.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralField f(kmax);
    const auto& t = f.table();
    for (std::size_t i = 0; i < t.size(); ++i) {
        double w = std::pow(mode_abs(t.mode(i)), -decay);
        f.coeffs()[i] = cplx(w * gauss(rng), w * gauss(rng));
    }
    return f;
}

// Single complex-exponential pair: field with coefficient c at mode k.
inline SpectralField single_mode(int kmax, ModeIndex k, cplx c) {
    SpectralField f(kmax);
    f.set_coeff(k, c);
    return f;
}

}  // namespace sqg::testing
