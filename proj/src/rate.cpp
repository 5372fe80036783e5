#include "sqg/rate.hpp"

#include <cmath>

namespace sqg {

namespace {

// Second-order time derivative on the uniform grid.
SpectralField d_dt(const Trajectory& traj, std::size_t i) {
    const double dt = traj.params.dt;
    const std::size_t N = traj.size() - 1;
    SpectralField d(traj.states[0].kmax());
    if (i == 0) {
        d.axpy(-1.5 / dt, traj.states[0]);
        d.axpy(2.0 / dt, traj.states[1]);
        d.axpy(-0.5 / dt, traj.states[2]);
    } else if (i == N) {
        d.axpy(1.5 / dt, traj.states[N]);
        d.axpy(-2.0 / dt, traj.states[N - 1]);
        d.axpy(0.5 / dt, traj.states[N - 2]);
    } else {
        d.axpy(0.5 / dt, traj.states[i + 1]);
        d.axpy(-0.5 / dt, traj.states[i - 1]);
    }
    return d;
}

double trapz(const std::vector<double>& v, double dt) {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s * dt;
}

}  // namespace

ControlPath recover_control(const Trajectory& traj) {
    if (traj.size() < 3)
        throw std::invalid_argument("recover_control: need at least two steps");
    const SqgParams& p = traj.params;
    ControlPath g;
    g.times = traj.times;
    g.values.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        SpectralField r = d_dt(traj, i);
        r += apply_lambda(traj.states[i], 2.0 * p.alpha);
        r += galerkin_project(advection(traj.states[i], p.grid_factor), p.m);
        g.values.push_back(apply_lambda(r, -2.0 * p.beta));
    }
    return g;
}

RateReport rate(const Trajectory& traj) {
    const SqgParams& p = traj.params;
    RateReport rep;
    rep.i0 = std::pow(sobolev_norm(traj.states[0], p.alpha - 2.0 * p.beta), 2);
    rep.recovered_control = recover_control(traj);
    rep.per_step_residual_norm.reserve(traj.size());
    std::vector<double> gsq;
    gsq.reserve(traj.size());
    for (const auto& v : rep.recovered_control.values) {
        double n = l2_norm(v);
        rep.per_step_residual_norm.push_back(n);
        gsq.push_back(n * n);
    }
    rep.i_dyna = 0.5 * trapz(gsq, p.dt);
    rep.total = rep.i0 + rep.i_dyna;
    return rep;
}

double variational_functional(const Trajectory& traj, const ControlPath& phi) {
    auto range = LpProfile::dyadic_range(traj.states[0].kmax());
    return variational_functional(traj, phi, (range.first + range.second) / 2);
}

double variational_functional(const Trajectory& traj, const ControlPath& phi, int j) {
    if (phi.size() != traj.size())
        throw std::invalid_argument("variational_functional: test function grid mismatch");
    const SqgParams& p = traj.params;
    const double dt = p.dt;
    const std::size_t n = traj.size();

    // d/dt phi with the same stencils as the control recovery.
    Trajectory phit;
    phit.params = p;
    phit.times = phi.times;
    phit.states = phi.values;

    std::vector<double> integrand(n), cost(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SpectralField& th = traj.states[i];
        const SpectralField& ph = phi.values[i];
        double v = -l2_inner(th, d_dt(phit, i));
        v += weighted_inner(th, ph, 2.0 * p.alpha);
        v += nonlinear_pairing_commutator(th, ph, j);
        integrand[i] = v;
        cost[i] = std::pow(sobolev_norm(ph, 2.0 * p.beta), 2);
    }
    double f = l2_inner(traj.states.back(), phi.values.back()) -
               l2_inner(traj.states.front(), phi.values.front());
    f += trapz(integrand, dt);
    return f - 0.5 * trapz(cost, dt);
}

Trajectory time_reverse(const Trajectory& traj) {
    Trajectory out;
    out.params = traj.params;
    out.times = traj.times;
    out.states.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        SpectralField s = traj.states[traj.size() - 1 - i];
        s *= -1.0;
        out.states.push_back(std::move(s));
    }
    return out;
}

ControlPath reversed_control(const Trajectory& traj, const ControlPath& g) {
    if (g.size() != traj.size())
        throw std::invalid_argument("reversed_control: control grid mismatch");
    const SqgParams& p = traj.params;
    ControlPath out;
    out.times = g.times;
    out.values.reserve(g.size());
    const std::size_t N = g.size() - 1;
    for (std::size_t i = 0; i <= N; ++i) {
        SpectralField v = g.values[N - i];
        v.axpy(-2.0, apply_lambda(resample(traj.states[N - i], v.kmax()),
                                  2.0 * p.alpha - 2.0 * p.beta));
        out.values.push_back(std::move(v));
    }
    return out;
}

double energy_residual(const Trajectory& traj, const ControlPath& g, EnergyMode mode) {
    const SqgParams& p = traj.params;
    if (g.size() != traj.size())
        throw std::invalid_argument("energy_residual: control grid mismatch");
    double s_lo, s_hi, pair_w;
    if (mode == EnergyMode::Kinetic) {
        if (!(std::abs(p.beta - p.alpha / 2.0) < 1e-12))
            throw std::invalid_argument("energy_residual: kinetic balance requires beta = alpha/2");
        s_lo = 0.0;
        s_hi = p.alpha;
        pair_w = p.alpha;
    } else {
        s_lo = p.alpha - 2.0 * p.beta;
        s_hi = 2.0 * p.alpha - 2.0 * p.beta;
        pair_w = 2.0 * p.alpha - 2.0 * p.beta;
    }
    const std::size_t n = traj.size();
    std::vector<double> dis(n), work(n);
    for (std::size_t i = 0; i < n; ++i) {
        dis[i] = std::pow(sobolev_norm(traj.states[i], s_hi), 2);
        work[i] = weighted_inner(traj.states[i], g.values[i], pair_w);
    }
    return 0.5 * std::pow(sobolev_norm(traj.states.back(), s_lo), 2) + trapz(dis, p.dt) -
           0.5 * std::pow(sobolev_norm(traj.states.front(), s_lo), 2) - trapz(work, p.dt);
}

}  // namespace sqg
