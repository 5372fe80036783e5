#include "sqg/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace sqg {

SpectralField apply_lambda(const SpectralField& f, double r) {
    if (!std::isfinite(r)) throw std::invalid_argument("apply_lambda: exponent must be finite");
    SpectralField out = f;
    const auto& t = f.table();
    auto& c = out.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::pow(t.lambda(i), r);
    return out;
}

SpectralField partial_derivative(const SpectralField& f, int axis) {
    if (axis != 1 && axis != 2) throw std::invalid_argument("partial_derivative: axis must be 1 or 2");
    SpectralField out = f;
    const auto& t = f.table();
    auto& c = out.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) {
        ModeIndex k = t.mode(i);
        double kj = axis == 1 ? k.k1 : k.k2;
        c[i] *= cplx(0.0, 2.0 * M_PI * kj);
    }
    return out;
}

SpectralField riesz(const SpectralField& f, int axis) {
    if (axis != 1 && axis != 2) throw std::invalid_argument("riesz: axis must be 1 or 2");
    SpectralField out = f;
    const auto& t = f.table();
    auto& c = out.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) {
        ModeIndex k = t.mode(i);
        double kj = axis == 1 ? k.k1 : k.k2;
        c[i] *= cplx(0.0, kj / mode_abs(k));
    }
    return out;
}

VelocityField riesz_velocity(const SpectralField& theta) {
    SpectralField u1 = riesz(theta, 2);
    u1 *= -1.0;
    return {std::move(u1), riesz(theta, 1)};
}

SpectralField advection(const SpectralField& theta, int grid_factor) {
    const int kmax = theta.kmax();
    const std::size_t n = dealiased_grid_size(kmax, grid_factor);
    VelocityField u = riesz_velocity(theta);
    std::vector<double> u1 = synthesize(u.u1, n);
    std::vector<double> u2 = synthesize(u.u2, n);
    std::vector<double> g1 = synthesize(partial_derivative(theta, 1), n);
    std::vector<double> g2 = synthesize(partial_derivative(theta, 2), n);
    for (std::size_t i = 0; i < u1.size(); ++i) u1[i] = u1[i] * g1[i] + u2[i] * g2[i];
    return analyze(u1, n, kmax);
}

double weighted_inner(const SpectralField& f, const SpectralField& g, double w) {
    if (f.kmax() != g.kmax()) {
        int k = std::max(f.kmax(), g.kmax());
        return weighted_inner(resample(f, k), resample(g, k), w);
    }
    const auto& t = f.table();
    const auto& a = f.coeffs();
    const auto& b = g.coeffs();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double re = a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        s += std::pow(t.lambda(i), w) * re;
    }
    return 2.0 * s;
}

double sobolev_norm(const SpectralField& f, double s) {
    if (!std::isfinite(s)) throw std::invalid_argument("sobolev_norm: index must be finite");
    return std::sqrt(std::max(0.0, weighted_inner(f, f, 2.0 * s)));
}

SpectralField exact_product(const SpectralField& a, const SpectralField& b) {
    const int kout = a.kmax() + b.kmax();
    // Alias-free for every product mode once n > 2*kout.
    const std::size_t n = next_pow2(2 * static_cast<std::size_t>(kout) + 2);
    std::vector<double> ga = synthesize(a, n);
    std::vector<double> gb = synthesize(b, n);
    double mean = 0.0;
    for (std::size_t i = 0; i < ga.size(); ++i) {
        ga[i] *= gb[i];
        mean += ga[i];
    }
    // The zero mode of the product is dropped by the zero-mean representation.
    (void)mean;
    return analyze(ga, n, kout);
}

namespace {

double lp_bump(double rho) {
    if (rho <= 0.5) return 1.0;
    if (rho >= 1.0) return 0.0;
    const double t = 2.0 * rho - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

}  // namespace

LpProfile::LpProfile() = default;

double LpProfile::phi(double rho) const { return lp_bump(std::abs(rho)); }

double LpProfile::psi(double rho) const { return phi(rho / 2.0) - phi(rho); }

double LpProfile::partition_defect(double xmin, double xmax, int samples) const {
    if (!(xmin > 0.0) || !(xmax > xmin)) throw std::invalid_argument("partition_defect: need 0 < xmin < xmax");
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        double x = xmin * std::pow(xmax / xmin, static_cast<double>(s) / (samples - 1));
        int jlo = static_cast<int>(std::floor(std::log2(x))) - 2;
        int jhi = static_cast<int>(std::ceil(std::log2(x))) + 2;
        double sum = 0.0;
        for (int j = jlo; j <= jhi; ++j) sum += psi(x / std::pow(2.0, j));
        worst = std::max(worst, std::abs(1.0 - sum));
    }
    return worst;
}

std::pair<int, int> LpProfile::dyadic_range(int kmax) {
    // |2 pi k| spans [2 pi, 2 pi sqrt(2) kmax]; one octave of slack each side.
    int jlo = static_cast<int>(std::floor(std::log2(2.0 * M_PI))) - 1;
    int jhi = static_cast<int>(std::ceil(std::log2(2.0 * M_PI * std::sqrt(2.0) * kmax))) + 1;
    return {jlo, jhi};
}

namespace {

template <typename Symbol>
SpectralField radial_multiplier(const SpectralField& f, Symbol sym) {
    SpectralField out = f;
    const auto& t = f.table();
    auto& c = out.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= sym(t.lambda(i));
    return out;
}

}  // namespace

SpectralField lp_block(const SpectralField& f, int j, const LpProfile& p) {
    const double scale = std::pow(2.0, j);
    return radial_multiplier(f, [&](double lam) { return p.psi(lam / scale); });
}

SpectralField lp_low(const SpectralField& f, int j, const LpProfile& p) {
    const double scale = std::pow(2.0, j);
    return radial_multiplier(f, [&](double lam) { return p.phi(lam / scale); });
}

SpectralField lp_high(const SpectralField& f, int j, const LpProfile& p) {
    const double scale = std::pow(2.0, j);
    return radial_multiplier(f, [&](double lam) { return 1.0 - p.phi(lam / scale); });
}

SpectralField commutator(const SpectralField& phi, const SpectralField& g) {
    const int kout = std::max(phi.kmax(), g.kmax());
    SpectralField prod = resample(exact_product(phi, g), kout);
    SpectralField out = apply_lambda(prod, 1.0);
    out -= resample(exact_product(phi, apply_lambda(g, 1.0)), kout);
    return out;
}

double nonlinear_pairing_direct(const SpectralField& theta, const SpectralField& phi) {
    VelocityField u = riesz_velocity(theta);
    double s = l2_inner(exact_product(theta, u.u1), partial_derivative(phi, 1));
    s += l2_inner(exact_product(theta, u.u2), partial_derivative(phi, 2));
    return -s;
}

double nonlinear_pairing_commutator(const SpectralField& theta, const SpectralField& phi,
                                    int j, const LpProfile& p) {
    auto range = LpProfile::dyadic_range(theta.kmax());
    if (j < range.first || j > range.second)
        throw std::invalid_argument("nonlinear_pairing_commutator: dyadic level outside admissible range");

    SpectralField low = lp_low(theta, j, p);
    SpectralField high = lp_high(theta, j, p);
    SpectralField d1phi = partial_derivative(phi, 1);
    SpectralField d2phi = partial_derivative(phi, 2);

    // <div(theta R_perp(S_j theta)), phi> = -<theta R_perp(S_j theta), grad phi>
    VelocityField us = riesz_velocity(low);
    double t1 = -l2_inner(exact_product(theta, us.u1), d1phi) -
                l2_inner(exact_product(theta, us.u2), d2phi);

    VelocityField uh = riesz_velocity(high);
    double t2 = -l2_inner(exact_product(low, uh.u1), d1phi) -
                l2_inner(exact_product(low, uh.u2), d2phi);

    // High-high term in commutator form.
    SpectralField lam_inv_high = apply_lambda(high, -1.0);
    double t3 = -0.5 * l2_inner(riesz(high, 2), commutator(d1phi, lam_inv_high)) +
                0.5 * l2_inner(riesz(high, 1), commutator(d2phi, lam_inv_high));

    return t1 + t2 + t3;
}

}  // namespace sqg
