#include "sqg/quasipotential.hpp"

#include <cmath>
#include <sstream>

#include "sqg/rate.hpp"

namespace sqg {

RelaxationResult relax(const SpectralField& phi, const SqgParams& p, double tol_rel,
                       const SimOptions& opts) {
    if (!(tol_rel > 0.0 && tol_rel < 1.0))
        throw std::invalid_argument("relax: tol_rel must lie in (0,1)");
    SqgParams pd = p;
    pd.epsilon = 0.0;
    pd.validate();
    const double s_lo = pd.alpha - 2.0 * pd.beta;

    RelaxationResult out;
    out.path.params = pd;

    GalerkinStepper stepper(pd, opts);
    stepper.reset(phi);
    const double norm0 = sobolev_norm(stepper.state(), s_lo);
    out.path.times.push_back(0.0);
    out.path.states.push_back(stepper.state());
    if (norm0 == 0.0) return out;

    const double target = tol_rel * norm0;
    const long max_steps = pd.steps();
    for (long i = 0; i < max_steps; ++i) {
        stepper.step(nullptr, nullptr);
        out.path.times.push_back(stepper.time());
        out.path.states.push_back(stepper.state());
        double n = sobolev_norm(stepper.state(), s_lo);
        if (n < target) {
            out.t_star = stepper.time();
            out.tail = n * n;
            return out;
        }
    }
    std::ostringstream msg;
    msg << "relax: no convergence before T=" << pd.T << "; ||theta(T)||_{H^{alpha-2beta}} = "
        << sobolev_norm(stepper.state(), s_lo);
    throw IntegrationError(msg.str(), pd.T);
}

namespace {

double trapz(const std::vector<double>& v, double dt) {
    if (v.size() < 2) return 0.0;
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
    return s * dt;
}

// Skeleton residual with a sign on the dissipation term:
// d_t theta + sign * Lambda^{2alpha} theta + P_m N(theta).
double half_residual_cost(const Trajectory& path, double sign) {
    const SqgParams& p = path.params;
    if (path.size() < 3) return 0.0;
    std::vector<double> sq(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        SpectralField r(path.states[0].kmax());
        const double dt = p.dt;
        const std::size_t N = path.size() - 1;
        if (i == 0) {
            r.axpy(-1.5 / dt, path.states[0]);
            r.axpy(2.0 / dt, path.states[1]);
            r.axpy(-0.5 / dt, path.states[2]);
        } else if (i == N) {
            r.axpy(1.5 / dt, path.states[N]);
            r.axpy(-2.0 / dt, path.states[N - 1]);
            r.axpy(0.5 / dt, path.states[N - 2]);
        } else {
            r.axpy(0.5 / dt, path.states[i + 1]);
            r.axpy(-0.5 / dt, path.states[i - 1]);
        }
        r.axpy(sign, apply_lambda(path.states[i], 2.0 * p.alpha));
        r += galerkin_project(advection(path.states[i], p.grid_factor), p.m);
        sq[i] = std::pow(sobolev_norm(r, -2.0 * p.beta), 2);
    }
    return 0.5 * trapz(sq, p.dt);
}

}  // namespace

double s_cost(const Trajectory& reversed_path) { return half_residual_cost(reversed_path, 1.0); }

SCostSplit s_cost_split(const Trajectory& reversed_path) {
    SCostSplit out;
    out.forward_residual_half_sq = half_residual_cost(reversed_path, -1.0);
    const SqgParams& p = reversed_path.params;
    const double s_lo = p.alpha - 2.0 * p.beta;
    out.boundary = std::pow(sobolev_norm(reversed_path.states.back(), s_lo), 2) -
                   std::pow(sobolev_norm(reversed_path.states.front(), s_lo), 2);
    return out;
}

QuasiPotentialReport quasi_potential(const SpectralField& phi, const SqgParams& p, double tol_rel,
                                     const SimOptions& opts) {
    RelaxationResult rr = relax(phi, p, tol_rel, opts);
    QuasiPotentialReport rep;
    const double s_lo = p.alpha - 2.0 * p.beta;
    rep.phi_norm_sq = std::pow(sobolev_norm(galerkin_project(resample(phi, p.m), p.m), s_lo), 2);
    rep.tail = rr.tail;
    rep.t_star = rr.t_star;
    if (rr.path.size() < 3) {
        rep.u_estimate = 0.0;
        rep.rel_gap = 0.0;
        return rep;
    }
    rep.u_estimate = s_cost(time_reverse(rr.path));
    const double expected = rep.phi_norm_sq - rep.tail;
    rep.rel_gap = rep.phi_norm_sq > 0.0 ? std::abs(rep.u_estimate - expected) / rep.phi_norm_sq : 0.0;
    return rep;
}

}  // namespace sqg
