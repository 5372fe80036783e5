#include "sqg/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sqg {

namespace {

void fail(const std::string& key, const std::string& constraint) {
    throw std::invalid_argument("SqgParams: " + key + " " + constraint);
}

}  // namespace

bool beta_admissible(double alpha, double beta) {
    const double tol = 1e-12;
    if (!(alpha > 0.0 && alpha < 1.0)) return false;
    if (std::abs(beta - alpha / 2.0) < tol) return true;
    if (alpha >= 0.5 && std::abs(beta - (alpha / 2.0 + 0.25)) < tol) return true;
    return false;
}

int SqgParams::steps() const {
    double r = T / dt;
    int n = static_cast<int>(std::llround(r));
    return n;
}

void SqgParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha", "must lie in (0,1)");
    if (!beta_admissible(alpha, beta))
        fail("beta", "must equal alpha/2 or alpha/2+1/4 (the latter only for alpha >= 1/2)");
    if (!(epsilon >= 0.0)) fail("epsilon", "must be >= 0");
    if (!(delta >= 0.0)) fail("delta", "must be >= 0");
    if (!(s_reg > alpha + 1.0)) fail("s_reg", "must exceed alpha + 1");
    if (m < 1) fail("m", "must be >= 1");
    if (!(T > 0.0)) fail("T", "must be > 0");
    if (!(dt > 0.0)) fail("dt", "must be > 0");
    if (dt > T) fail("dt", "must not exceed T");
    double r = T / dt;
    if (std::abs(r - std::llround(r)) > 1e-9 * std::max(1.0, r))
        fail("dt", "must divide T into an integer number of steps");
    if (!(blowup_factor > 0.0)) fail("blowup_factor", "must be > 0");
    if (grid_factor < 2) fail("grid_factor", "must be >= 2");
}

double lambda_delta(ModeIndex k, double delta, double s_reg) {
    if (delta == 0.0) return 1.0;
    double lam = lambda_symbol(k);
    return 1.0 / std::sqrt(1.0 + delta * std::pow(lam, 2.0 * s_reg));
}

NoiseSpec noise_spec(const SqgParams& p) {
    p.validate();
    auto table = ModeTable::get(p.m);
    NoiseSpec spec;
    spec.m = p.m;
    spec.lambda.assign(table->size(), 0.0);
    spec.beta_multiplier.assign(table->size(), 0.0);
    for (std::size_t i = 0; i < table->size(); ++i) {
        if (table->abs2(i) > p.m * p.m) continue;
        spec.lambda[i] = lambda_delta(table->mode(i), p.delta, p.s_reg);
        spec.beta_multiplier[i] = std::pow(table->lambda(i), 2.0 * p.beta);
    }
    return spec;
}

double hs_norm_sq(double alpha, double delta, double s_reg, int cutoff) {
    double s = 0.0;
    // Both half-lattices contribute one real mode each per lattice point.
    for (int k1 = -cutoff; k1 <= cutoff; ++k1) {
        for (int k2 = -cutoff; k2 <= cutoff; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            if (k1 * k1 + k2 * k2 > cutoff * cutoff) continue;
            ModeIndex k{k1, k2};
            double lam = lambda_symbol(k);
            double l = lambda_delta(k, delta, s_reg);
            s += std::pow(lam, 2.0 * alpha) * l * l;
        }
    }
    return s;
}

double hs_norm_sq(const SqgParams& p) { return hs_norm_sq(p.alpha, p.delta, p.s_reg, p.m); }

ScalingReport scaling_ok(const SqgParams& p, double threshold) {
    ScalingReport r;
    r.threshold = threshold;
    if (p.epsilon == 0.0) {
        r.diagnostic = 0.0;
    } else if (p.delta > 0.0) {
        r.diagnostic = p.epsilon * std::pow(p.delta, -(p.alpha + 1.0) / p.s_reg);
    } else {
        r.diagnostic = p.epsilon * std::pow(static_cast<double>(p.m), 2.0 + 2.0 * p.alpha);
    }
    r.ok = r.diagnostic < threshold;
    return r;
}

}  // namespace sqg
