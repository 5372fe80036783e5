// Acceptance suite: every check the toolkit must satisfy, each printed as a
// single PASS/FAIL line. Statistical checks run at fixed seeds so the suite
// is reproducible; tolerances are pinned in code next to each criterion.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "sqg/io.hpp"
#include "sqg/montecarlo.hpp"
#include "sqg/quasipotential.hpp"
#include "sqg/rate.hpp"

using namespace sqg;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

SpectralField random_band_field(int kmax, std::mt19937_64& rng, double decay = 1.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralField f(kmax);
    const auto& t = f.table();
    for (std::size_t i = 0; i < t.size(); ++i) {
        double w = std::pow(mode_abs(t.mode(i)), -decay);
        f.coeffs()[i] = cplx(w * gauss(rng), w * gauss(rng));
    }
    return f;
}

// FFT-independent synthesis using a shared cos/sin table on the n-grid:
// cos(2 pi (k . j)/n) is a pure lattice lookup.
struct TrigTable {
    std::size_t n;
    std::vector<double> c, s;
    explicit TrigTable(std::size_t n_) : n(n_), c(n_), s(n_) {
        for (std::size_t m = 0; m < n; ++m) {
            c[m] = std::cos(2.0 * M_PI * static_cast<double>(m) / static_cast<double>(n));
            s[m] = std::sin(2.0 * M_PI * static_cast<double>(m) / static_cast<double>(n));
        }
    }
    std::vector<double> eval(const SpectralField& f) const {
        std::vector<double> out(n * n, 0.0);
        const auto& t = f.table();
        const long nn = static_cast<long>(n);
        for (std::size_t i = 0; i < t.size(); ++i) {
            ModeIndex k = t.mode(i);
            double re = f.coeffs()[i].real(), im = f.coeffs()[i].imag();
            if (re == 0.0 && im == 0.0) continue;
            for (std::size_t a = 0; a < n; ++a) {
                long ka = (static_cast<long>(k.k1) * static_cast<long>(a)) % nn;
                for (std::size_t b = 0; b < n; ++b) {
                    long ph = (ka + static_cast<long>(k.k2) * static_cast<long>(b)) % nn;
                    if (ph < 0) ph += nn;
                    out[a * n + b] += 2.0 * (re * c[static_cast<std::size_t>(ph)] -
                                             im * s[static_cast<std::size_t>(ph)]);
                }
            }
        }
        return out;
    }
};

double quad_mean(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v;
    return s / static_cast<double>(a.size());
}

void criterion_1() {
    const int kmax = 16;
    const int reps = 100;
    std::mt19937_64 rng(101);
    const std::size_t nq = 64;  // exact for triple products of bandwidth 3*16
    TrigTable table(nq);
    double worst = 0.0;
    std::string worst_what = "none";
    auto track = [&](double rel, const char* what) {
        if (rel > worst) {
            worst = rel;
            worst_what = what;
        }
    };
    for (int r = 0; r < reps; ++r) {
        SpectralField th = random_band_field(kmax, rng);
        VelocityField u = riesz_velocity(th);
        SpectralField div = partial_derivative(u.u1, 1);
        div += partial_derivative(u.u2, 2);
        track(l2_norm(div) / l2_norm(th), "riesz divergence");
        double un = std::sqrt(l2_inner(u.u1, u.u1) + l2_inner(u.u2, u.u2));
        track(std::abs(un - l2_norm(th)) / l2_norm(th), "riesz isometry");

        SpectralField nl = advection(th);
        double scale = l2_norm(nl) * l2_norm(th);
        track(std::abs(l2_inner(nl, th)) / scale, "N-theta orthogonality");
        track(std::abs(l2_inner(nl, apply_lambda(th, -1.0))) / scale, "N-hamiltonian orthogonality");

        // Commutator identity for the nonlinear pairing against direct lattice
        // quadrature.
        SpectralField phi = random_band_field(8, rng, 2.0);
        auto thg = table.eval(th);
        auto u1g = table.eval(u.u1);
        auto u2g = table.eval(u.u2);
        auto p1g = table.eval(partial_derivative(phi, 1));
        auto p2g = table.eval(partial_derivative(phi, 2));
        std::vector<double> prod(nq * nq);
        for (std::size_t i = 0; i < prod.size(); ++i)
            prod[i] = thg[i] * (u1g[i] * p1g[i] + u2g[i] * p2g[i]);
        double lhs = 2.0 * quad_mean(prod);
        SpectralField lam_inv = apply_lambda(th, -1.0);
        double rhs = l2_inner(riesz(th, 2), commutator(partial_derivative(phi, 1), lam_inv)) -
                     l2_inner(riesz(th, 1), commutator(partial_derivative(phi, 2), lam_inv));
        track(std::abs(rhs - lhs) / std::abs(lhs), "commutator identity");
    }
    report(1, worst < 1e-8,
           fmt("spectral identities, 100 fields at kmax=16: worst rel err %.2e (%s), tol 1e-8",
               worst, worst_what.c_str()));
}

struct RoundTrip {
    double err;
    double idyna_rel;
};

RoundTrip control_round_trip(double alpha, double beta, double dt, std::uint64_t seed) {
    SqgParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.m = 8;
    p.T = 0.5;
    p.dt = dt;
    p.seed = seed;
    std::mt19937_64 rng(seed);
    SpectralField g1 = galerkin_project(random_band_field(p.m, rng, 2.0), p.m);
    SpectralField g2 = galerkin_project(random_band_field(p.m, rng, 2.0), p.m);
    ControlPath g;
    const int N = p.steps();
    for (int i = 0; i <= N; ++i) {
        double t = i * p.dt;
        SpectralField v = g1;
        v *= std::cos(t);
        v.axpy(std::sin(3.0 * t), g2);
        g.times.push_back(t);
        g.values.push_back(std::move(v));
    }
    SpectralField th0 = galerkin_project(random_band_field(p.m, rng, 2.0), p.m);
    Trajectory traj = solve_skeleton(th0, &g, p);
    RateReport rep = rate(traj);
    double num = 0.0, den = 0.0, gsq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        SpectralField d = rep.recovered_control.values[i];
        d -= g.values[i];
        double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
        num += w * std::pow(l2_norm(d), 2) * dt;
        den += w * std::pow(l2_norm(g.values[i]), 2) * dt;
        gsq += w * std::pow(l2_norm(g.values[i]), 2) * dt;
    }
    RoundTrip rt;
    rt.err = std::sqrt(num / den);
    rt.idyna_rel = std::abs(rep.i_dyna - 0.5 * gsq) / (0.5 * gsq);
    return rt;
}

void criterion_2() {
    struct Cfg {
        double alpha, beta;
    };
    std::vector<Cfg> cfgs = {{0.3, 0.15}, {0.5, 0.25}, {0.5, 0.5}, {0.75, 0.375}, {0.75, 0.625}};
    bool pass = true;
    double worst_order = 10.0, worst_err = 0.0, worst_idyna = 0.0;
    for (const auto& c : cfgs) {
        std::vector<double> errs;
        double idyna_rel = 0.0;
        for (double dt : {4e-3, 2e-3, 1e-3}) {
            RoundTrip rt = control_round_trip(c.alpha, c.beta, dt, 11);
            errs.push_back(rt.err);
            idyna_rel = rt.idyna_rel;
        }
        double o1 = std::log2(errs[0] / errs[1]);
        double o2 = std::log2(errs[1] / errs[2]);
        worst_order = std::min({worst_order, o1, o2});
        worst_err = std::max(worst_err, errs[2]);
        worst_idyna = std::max(worst_idyna, idyna_rel);
        if (o1 < 1.8 || o2 < 1.8 || errs[2] > 0.01 || idyna_rel > 0.01) pass = false;
    }
    report(2, pass,
           fmt("control round trip m=8, 5 (alpha,beta) pairs: min order %.2f (>=1.8), worst err "
               "%.2e (<1e-2), worst I_dyna rel %.2e (<1e-2)",
               worst_order, worst_err, worst_idyna));
}

void criterion_3() {
    SqgParams p;
    p.alpha = 0.5;
    p.beta = 0.25;
    p.epsilon = 0.1;
    p.m = 2;
    p.T = 1.0;
    p.dt = 1e-3;
    p.seed = 7;
    p.dt = 5e-4;  // keeps the O(dt) variance bias of the explicit noise well under the SE
    SimOptions o;
    o.drift = DriftMode::Tensor;
    InvariantMeasureReport rep = invariant_measure_test(p, 6000.0, o, 0.2, 64, 3.0);
    double worst = 0.0;
    for (const auto& r : rep.rows) worst = std::max(worst, std::abs(r.z));
    report(3, rep.pass,
           fmt("invariant measure m=2 eps=0.1 over %.0f time units: 12 modes, max |z| = %.2f "
               "(3 SE limit)",
               rep.t_total, worst));
}

void criterion_4() {
    EnsembleConfig cfg;
    cfg.params.alpha = 0.5;
    cfg.params.beta = 0.25;
    cfg.params.epsilon = 0.1;
    cfg.params.m = 2;
    cfg.params.T = 1.0;
    cfg.params.dt = 1e-3;
    cfg.params.seed = 42;
    cfg.n_traj = 10000;
    cfg.drift = DriftMode::Tensor;
    ReversibilityReport fwd = reversibility_test(cfg, 0.2);
    double worst = 0.0;
    for (const auto& r : fwd.rows) worst = std::max(worst, std::abs(r.z));

    EnsembleConfig bad = cfg;
    bad.params.m = 3;       // m = 2 triads cannot move energy across shells
    bad.params.epsilon = 1.0;
    bad.params.seed = 1;
    bad.n_traj = 20000;
    bad.mutation = DriftMutation::FlipLowShell;
    ReversibilityReport neg = reversibility_test(bad, 0.1);
    double worst_neg = 0.0;
    for (const auto& r : neg.rows) worst_neg = std::max(worst_neg, std::abs(r.z));

    report(4, fwd.pass && !neg.pass,
           fmt("reversibility: true dynamics max |z| = %.2f (<4), sign-mutated drift max |z| = "
               "%.2f (>4 expected)",
               worst, worst_neg));
}

void criterion_5() {
    bool pass = true;
    double worst_order = 10.0;
    for (double beta_shift : {0.0, 0.25}) {
        SqgParams p;
        p.alpha = 0.5;
        p.beta = 0.25 + beta_shift;
        p.m = 4;
        p.T = 0.5;
        p.seed = 5;
        std::vector<double> kin, gen, idrev;
        // The exchange identity subtracts two O(dt^2) quantities and only
        // reaches its asymptotic rate below dt ~ 1e-3 at this resolution.
        for (double dt : {4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4}) {
            p.dt = dt;
            std::mt19937_64 rng(31);
            SpectralField g1 = galerkin_project(random_band_field(p.m, rng, 2.0), p.m);
            SpectralField th0 = galerkin_project(random_band_field(p.m, rng, 2.0), p.m);
            ControlPath g;
            const int N = p.steps();
            for (int i = 0; i <= N; ++i) {
                double t = i * dt;
                SpectralField v = g1;
                v *= std::cos(2.0 * t);
                g.times.push_back(t);
                g.values.push_back(std::move(v));
            }
            Trajectory traj = solve_skeleton(th0, &g, p);
            gen.push_back(std::abs(energy_residual(traj, g, EnergyMode::Generalized)));
            if (beta_shift == 0.0)
                kin.push_back(std::abs(energy_residual(traj, g, EnergyMode::Kinetic)));

            // Reversed-control identity: I(T theta) vs the exchange formula.
            RateReport rev = rate(time_reverse(traj));
            const double s_lo = p.alpha - 2.0 * p.beta;
            std::vector<double> dis(traj.size()), work(traj.size()), gg(traj.size());
            for (std::size_t i = 0; i < traj.size(); ++i) {
                dis[i] = std::pow(sobolev_norm(traj.states[i], 2.0 * p.alpha - 2.0 * p.beta), 2);
                work[i] =
                    weighted_inner(traj.states[i], g.values[i], 2.0 * p.alpha - 2.0 * p.beta);
                gg[i] = std::pow(l2_norm(g.values[i]), 2);
            }
            auto trapz = [&](const std::vector<double>& v) {
                double s = 0.5 * (v.front() + v.back());
                for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
                return s * dt;
            };
            double rhs = std::pow(sobolev_norm(traj.states.back(), s_lo), 2) + 0.5 * trapz(gg) +
                         2.0 * trapz(dis) - 2.0 * trapz(work);
            idrev.push_back(std::abs(rev.total - rhs));
        }
        auto check_order = [&](const std::vector<double>& e, std::size_t from) {
            for (std::size_t i = from; i + 1 < e.size(); ++i) {
                double o = std::log2(e[i] / e[i + 1]);
                worst_order = std::min(worst_order, o);
                if (o < 1.8) pass = false;
            }
        };
        check_order(gen, 0);
        if (!kin.empty()) check_order(kin, 0);
        check_order(idrev, 2);
    }
    report(5, pass,
           fmt("energy balances and reversed-control identity: min refinement order %.2f (>=1.8)",
               worst_order));
}

void criterion_6() {
    SqgParams p;
    p.alpha = 0.5;
    p.beta = 0.25;
    p.m = 4;
    p.T = 10.0;
    p.seed = 3;

    bool pass = true;
    std::string detail;

    // Single mode: U = ||phi||^2 (1 - tol^2) + O(dt^2).
    {
        const double tol = 1e-2;
        SpectralField phi(p.m);
        phi.set_real_coeff(static_cast<std::size_t>(phi.table().index_of({1, 0})), Trig::Cos, 0.25);
        std::vector<double> gaps;
        for (double dt : {2e-3, 1e-3}) {
            p.dt = dt;
            QuasiPotentialReport rep = quasi_potential(phi, p, tol);
            gaps.push_back(std::abs(rep.u_estimate - (rep.phi_norm_sq - rep.tail)));
        }
        bool ok = gaps[1] < gaps[0] && gaps[1] < 1e-4;
        pass = pass && ok;
        detail += fmt("single-mode gap %.1e->%.1e; ", gaps[0], gaps[1]);
    }

    // Generic small multi-mode target: within 1% after tail correction.
    double rel_gap = 0.0;
    {
        p.dt = 1e-3;
        std::mt19937_64 rng(13);
        SpectralField phi = galerkin_project(random_band_field(p.m, rng, 1.5), p.m);
        phi *= 0.15 / l2_norm(phi);
        QuasiPotentialReport rep = quasi_potential(phi, p, 1e-3);
        rel_gap = rep.rel_gap;
        pass = pass && rel_gap < 0.01;
        detail += fmt("multi-mode rel gap %.2e (<1e-2); ", rel_gap);

        // Lower bound on 50 perturbed admissible paths.
        p.dt = 2e-3;
        RelaxationResult rr = relax(phi, p, 1e-3);
        Trajectory rev = time_reverse(rr.path);
        const double phi_sq = std::pow(sobolev_norm(phi, p.alpha - 2.0 * p.beta), 2);
        const double slack = 100.0 * p.dt * p.dt;
        std::mt19937_64 prng(19);
        int violations = 0;
        for (int repi = 0; repi < 50; ++repi) {
            Trajectory noisy = rev;
            for (std::size_t i = 1; i + 1 < noisy.size(); ++i) {
                SpectralField bump = galerkin_project(random_band_field(p.m, prng, 2.0), p.m);
                double t = noisy.times[i];
                double env = 0.05 * std::sin(M_PI * t / noisy.times.back()) *
                             std::cos(5.0 * t + static_cast<double>(repi));
                noisy.states[i].axpy(env / std::max(1.0, l2_norm(bump)), bump);
            }
            if (s_cost(noisy) < phi_sq - rr.tail - slack) ++violations;
        }
        pass = pass && violations == 0;
        detail += fmt("lower-bound violations %d/50", violations);
    }
    report(6, pass, "quasi-potential: " + detail);
}

void criterion_7() {
    EnsembleConfig cfg;
    cfg.params.alpha = 0.5;
    cfg.params.beta = 0.25;
    cfg.params.epsilon = 0.1;
    cfg.params.m = 2;
    cfg.params.T = 0.5;
    cfg.params.dt = 1e-3;
    cfg.params.seed = 17;
    cfg.n_traj = 4000;
    cfg.drift = DriftMode::Tensor;
    cfg.functional = Observable::TerminalNorm;

    TiltTarget target;
    SpectralField th0(cfg.params.m);
    th0.set_real_coeff(static_cast<std::size_t>(th0.table().index_of({1, 0})), Trig::Cos, 0.2);
    target.theta0 = th0;
    const int N = cfg.params.steps();
    for (int i = 0; i <= N; ++i) {
        double t = i * cfg.params.dt;
        SpectralField v(cfg.params.m);
        v.set_real_coeff(static_cast<std::size_t>(v.table().index_of({0, 1})), Trig::Sin,
                         0.3 * std::cos(2.0 * t));
        target.g.times.push_back(t);
        target.g.values.push_back(std::move(v));
    }
    TiltResult res = tilt_simulate(target, cfg);
    double zw = std::abs(res.weight_mean - 1.0) / res.weight_se;
    double comb = std::sqrt(res.weighted_se * res.weighted_se + res.direct_se * res.direct_se);
    double zc = std::abs(res.weighted_mean - res.direct_mean) / comb;
    bool ent_ok = res.entropy_estimate <= res.rate_bound + 3.0 * res.entropy_se;
    bool pass = zw < 3.0 && zc < 3.0 && ent_ok && !res.degenerate;
    report(7, pass,
           fmt("girsanov tilt: |mean(w)-1|/se = %.2f (<3), estimator gap z = %.2f (<3), eps Ent "
               "%.4f <= bound %.4f",
               zw, zc, res.entropy_estimate, res.rate_bound));
}

void criterion_8() {
    struct Pt {
        double eps, eta, delta;
    };
    // Every point keeps 2 eta lambda_max^2 < 1 so the MC variance is finite.
    std::vector<Pt> grid = {{0.5, 0.3, 0.0}, {0.2, 0.4, 0.0}, {1.0, 0.2, 0.0},
                            {0.5, 0.45, 0.0}, {0.3, 0.8, 0.5}, {0.5, 1.2, 1.0}};
    bool pass = true;
    double worst = 0.0;
    for (const auto& pt : grid) {
        SqgParams p;
        p.alpha = 0.5;
        p.beta = 0.25;
        p.epsilon = pt.eps;
        p.delta = pt.delta;
        p.m = 2;
        p.T = 1.0;
        p.dt = 1e-2;
        p.seed = 23;
        ExpMomentResult r = gaussian_exp_moment(pt.eta, p, 100000);
        double z = std::abs(r.mc - r.analytic) / r.mc_se;
        worst = std::max(worst, z);
        if (z > 3.0) pass = false;
    }
    report(8, pass, fmt("gaussian exponential moments on 6-point grid: max |z| = %.2f (<3)", worst));
}

void criterion_9() {
    bool pass = true;
    double worst = 0.0;
    // The delta window [1e-6, 1e-2] sits in the asymptotic regime for this
    // (alpha, s) at cutoff 256; steeper s pushes the transition radius into
    // the first few shells where the lattice sum is no longer scaling.
    for (auto [alpha, s_reg] : {std::pair{0.5, 2.0}}) {
        std::vector<double> lx, ly;
        for (double d : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
            lx.push_back(std::log(d));
            ly.push_back(std::log(hs_norm_sq(alpha, d, s_reg, 256)));
        }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= lx.size();
        my /= ly.size();
        double num = 0, den = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            num += (lx[i] - mx) * (ly[i] - my);
            den += (lx[i] - mx) * (lx[i] - mx);
        }
        double slope = num / den;
        double expect = -(alpha + 1.0) / s_reg;
        double rel = std::abs(slope - expect) / std::abs(expect);
        worst = std::max(worst, rel);
        if (rel > 0.10) pass = false;
    }
    report(9, pass,
           fmt("HS-norm blow-up slope at cutoff 256: worst relative slope error %.3f (<0.10)",
               worst));
}

void criterion_10() {
    EnsembleConfig cfg;
    cfg.params.alpha = 0.5;
    cfg.params.beta = 0.25;
    cfg.params.epsilon = 0.1;
    cfg.params.m = 2;
    cfg.params.T = 0.5;
    cfg.params.dt = 1e-3;
    cfg.params.seed = 29;
    cfg.n_traj = 2000;
    cfg.drift = DriftMode::Tensor;

    bool pass = true;
    double worst = -100.0;
    for (int which = 0; which < 2; ++which) {
        ControlPath phi;
        const int N = cfg.params.steps();
        for (int i = 0; i <= N; ++i) {
            double t = i * cfg.params.dt;
            SpectralField v(cfg.params.m);
            if (which == 0) {
                v.set_real_coeff(static_cast<std::size_t>(v.table().index_of({1, 0})), Trig::Sin,
                                 0.15 * std::sin(2.0 * t));
                v.set_real_coeff(static_cast<std::size_t>(v.table().index_of({1, 1})), Trig::Cos,
                                 0.1 * std::cos(t));
            } else {
                v.set_real_coeff(static_cast<std::size_t>(v.table().index_of({0, 1})), Trig::Cos,
                                 0.2 * std::cos(3.0 * t));
            }
            phi.times.push_back(t);
            phi.values.push_back(std::move(v));
        }
        SupermartingaleReport rep = supermartingale_check(phi, cfg, 8, 0.0, 1.0, 3.0);
        for (double z : rep.increment_z) worst = std::max(worst, z);
        if (!rep.nonincreasing) pass = false;
    }
    report(10, pass,
           fmt("supermartingale mean Q non-increasing, two test functions: max increment z = "
               "%.2f (<3)",
               worst));
}

}  // namespace

int main() {
    std::printf("SQG toolkit acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failures);
    return 3;
}
