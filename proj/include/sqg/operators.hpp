// Spatial operators on spectral fields: fractional Laplacian powers, Riesz
// velocity, dealiased advection, Sobolev norms, Littlewood-Paley blocks and
// the commutator form of the nonlinear pairing.

#pragma once

#include <utility>

#include "sqg/field.hpp"

namespace sqg {

// Lambda^r, the Fourier multiplier |2 pi k|^r.
SpectralField apply_lambda(const SpectralField& f, double r);

// d/dx_axis, axis in {1, 2}.
SpectralField partial_derivative(const SpectralField& f, int axis);

// Riesz transform R_axis with symbol i k_axis / |k|.
SpectralField riesz(const SpectralField& f, int axis);

struct VelocityField {
    SpectralField u1;
    SpectralField u2;
};

// u = R_perp(theta) = (-R_2 theta, R_1 theta); divergence-free, L2-isometric.
VelocityField riesz_velocity(const SpectralField& theta);

// N(theta) = u_theta . grad(theta), computed on an alias-free physical grid
// and truncated back to kmax.
SpectralField advection(const SpectralField& theta, int grid_factor = 2);

// || f ||_{H^s} with the |2 pi k| convention.
double sobolev_norm(const SpectralField& f, double s);
// 2 * sum over the half-lattice of |2 pi k|^w Re(f conj(g)); w is the total
// weight exponent, so <Lambda^c f, g>_{L2} = weighted_inner(f, g, c).
double weighted_inner(const SpectralField& f, const SpectralField& g, double w);

// Product of two band-limited fields, exact: the result carries the full
// bandwidth kmax(a) + kmax(b).
SpectralField exact_product(const SpectralField& a, const SpectralField& b);

// Radial Littlewood-Paley bump: phi = 1 on [0,1/2], 0 on [1,inf), with the
// exp(1 - 1/(1-t^2)) transition rescaled to [1/2,1]; psi(x) = phi(x/2) - phi(x).
class LpProfile {
  public:
    LpProfile();

    double phi(double rho) const;
    double psi(double rho) const;

    // max_j |1 - sum_j psi(x/2^j)| over sampled x in [xmin, xmax]; the dyadic
    // sum telescopes so this is a rounding-level check.
    double partition_defect(double xmin, double xmax, int samples = 257) const;

    // Admissible dyadic levels for a band limited to kmax: outside this range
    // every block operator is trivially 0 or the identity.
    static std::pair<int, int> dyadic_range(int kmax);
};

// Delta_j, S_j and H_j = Id - S_j as multipliers psi(|2 pi k|/2^j) etc.
SpectralField lp_block(const SpectralField& f, int j, const LpProfile& p = LpProfile());
SpectralField lp_low(const SpectralField& f, int j, const LpProfile& p = LpProfile());
SpectralField lp_high(const SpectralField& f, int j, const LpProfile& p = LpProfile());

// [Lambda, phi] g = Lambda(phi g) - phi Lambda(g), truncated to
// max(kmax(phi), kmax(g)).
SpectralField commutator(const SpectralField& phi, const SpectralField& g);

// <div(theta R_perp theta), phi> evaluated exactly from the coefficients.
double nonlinear_pairing_direct(const SpectralField& theta, const SpectralField& phi);

// Same pairing through the three-term low/low/high split at dyadic level j,
// with the high-high part in commutator form. Agrees with the direct route for
// band-limited fields and is independent of the admissible j.
double nonlinear_pairing_commutator(const SpectralField& theta, const SpectralField& phi,
                                    int j, const LpProfile& p = LpProfile());

}  // namespace sqg
