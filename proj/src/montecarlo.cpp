#include "sqg/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace sqg {

void parallel_for_streams(int n, int n_threads, const std::function<void(int)>& work) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (n_threads <= 0) {
        if (const char* env = std::getenv("SQG_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) n_threads = v;
        }
    }
    int nt = n_threads > 0 ? n_threads : hw;
    nt = std::min(nt, n);
    if (nt <= 1) {
        for (int i = 0; i < n; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::atomic<int> next{0};
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) return;
                work(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

Observable observable_from_name(const std::string& name) {
    if (name == "one") return Observable::One;
    if (name == "sup-norm") return Observable::SupNorm;
    if (name == "terminal-norm") return Observable::TerminalNorm;
    if (name == "integrated-high-norm") return Observable::TimeIntegratedHighNorm;
    if (name == "terminal-mode") return Observable::TerminalMode;
    throw std::invalid_argument("unknown observable: " + name);
}

std::string observable_name(Observable o) {
    switch (o) {
        case Observable::One: return "one";
        case Observable::SupNorm: return "sup-norm";
        case Observable::TerminalNorm: return "terminal-norm";
        case Observable::TimeIntegratedHighNorm: return "integrated-high-norm";
        case Observable::TerminalMode: return "terminal-mode";
    }
    return "?";
}

void EnsembleConfig::validate() const {
    params.validate();
    if (n_traj < 2) throw std::invalid_argument("EnsembleConfig: n_traj must be >= 2");
    if (initial == InitialLaw::Gaussian && !(params.epsilon > 0.0))
        throw std::invalid_argument("EnsembleConfig: Gaussian initial law needs epsilon > 0");
}

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    const double n = static_cast<double>(v.size());
    for (double x : v) r.mean += x;
    r.mean /= n;
    double s2 = 0.0;
    for (double x : v) s2 += (x - r.mean) * (x - r.mean);
    r.se = n > 1 ? std::sqrt(s2 / (n - 1) / n) : 0.0;
    return r;
}

// Online observable accumulator over one trajectory.
class ObservableTracker {
  public:
    ObservableTracker(const EnsembleConfig& cfg) : cfg_(cfg) {
        s_lo_ = cfg.params.alpha - 2.0 * cfg.params.beta;
        s_hi_ = 2.0 * cfg.params.alpha - 2.0 * cfg.params.beta;
    }

    void start(const SpectralField& state) {
        value_ = 0.0;
        prev_hi_ = 0.0;
        switch (cfg_.functional) {
            case Observable::SupNorm: value_ = sobolev_norm(state, s_lo_); break;
            case Observable::TimeIntegratedHighNorm:
                prev_hi_ = std::pow(sobolev_norm(state, s_hi_), 2);
                break;
            default: break;
        }
    }

    void step(const SpectralField& state) {
        switch (cfg_.functional) {
            case Observable::SupNorm:
                value_ = std::max(value_, sobolev_norm(state, s_lo_));
                break;
            case Observable::TimeIntegratedHighNorm: {
                double hi = std::pow(sobolev_norm(state, s_hi_), 2);
                value_ += 0.5 * cfg_.params.dt * (prev_hi_ + hi);
                prev_hi_ = hi;
                break;
            }
            default: break;
        }
    }

    double finish(const SpectralField& state) const {
        switch (cfg_.functional) {
            case Observable::One: return 1.0;
            case Observable::SupNorm: return value_;
            case Observable::TerminalNorm: return sobolev_norm(state, s_lo_);
            case Observable::TimeIntegratedHighNorm: return value_;
            case Observable::TerminalMode: {
                int h = state.table().index_of(in_half_lattice(cfg_.obs_mode) ? cfg_.obs_mode
                                                                              : conj_mode(cfg_.obs_mode));
                if (h < 0) throw std::invalid_argument("observable mode outside the Galerkin band");
                return state.real_coeff(static_cast<std::size_t>(h), cfg_.obs_trig);
            }
        }
        return 0.0;
    }

  private:
    const EnsembleConfig& cfg_;
    double s_lo_ = 0.0, s_hi_ = 0.0;
    double value_ = 0.0;
    double prev_hi_ = 0.0;
};

SpectralField initial_state(const EnsembleConfig& cfg, std::uint32_t stream) {
    switch (cfg.initial) {
        case InitialLaw::Gaussian: return sample_gaussian_initial(cfg.params, stream);
        case InitialLaw::Fixed: return cfg.initial_field;
        case InitialLaw::Zero: return SpectralField(cfg.params.m);
    }
    return SpectralField(cfg.params.m);
}

}  // namespace

McEstimate mc_estimate(const EnsembleConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_traj;
    std::vector<double> values(n, 0.0);
    parallel_for_streams(n, cfg.n_threads, [&](int i) {
        SimOptions opts;
        opts.drift = cfg.drift;
        opts.mutation = cfg.mutation;
        opts.stream = static_cast<std::uint32_t>(i);
        GalerkinStepper stepper(cfg.params, opts);
        stepper.reset(initial_state(cfg, static_cast<std::uint32_t>(i)));
        ObservableTracker obs(cfg);
        obs.start(stepper.state());
        const int N = cfg.params.steps();
        for (int s = 0; s < N; ++s) {
            stepper.step(nullptr, nullptr);
            obs.step(stepper.state());
        }
        values[i] = obs.finish(stepper.state());
    });

    McEstimate est;
    auto ms = mean_se(values);
    est.mean = ms.mean;
    est.se = ms.se;
    for (double v : values)
        if (v > cfg.threshold) ++est.hits;
    const double nn = static_cast<double>(n);
    est.p_hat = static_cast<double>(est.hits) / nn;
    const double z = 1.959963984540054;
    const double z2 = z * z;
    const double centre = (est.p_hat + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half =
        z * std::sqrt(est.p_hat * (1 - est.p_hat) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
    est.wilson_lo = std::max(0.0, centre - half);
    est.wilson_hi = std::min(1.0, centre + half);
    est.zero_hits = est.hits == 0;
    est.eps_log_p = cfg.params.epsilon *
                    std::log(est.zero_hits ? est.wilson_hi : est.p_hat);
    return est;
}

InvariantMeasureReport invariant_measure_test(const SqgParams& p, double t_total,
                                              const SimOptions& opts, double burn_in_frac,
                                              int n_batches, double z_limit) {
    p.validate();
    if (!(p.epsilon > 0.0)) throw std::invalid_argument("invariant_measure_test: epsilon must be > 0");
    GalerkinStepper stepper(p, opts);
    stepper.reset(sample_gaussian_initial(p, opts.stream));
    const RealBasis& basis = stepper.basis();
    const std::size_t M = basis.size();

    const long total_steps = static_cast<long>(std::llround(t_total / p.dt));
    const long burn = static_cast<long>(std::llround(burn_in_frac * total_steps));
    const long keep = total_steps - burn;
    const long batch_len = std::max<long>(1, keep / n_batches);
    const long used = batch_len * n_batches;

    for (long i = 0; i < burn; ++i) stepper.step(nullptr, nullptr);

    std::vector<double> batch_acc(M, 0.0);
    std::vector<std::vector<double>> batch_means(static_cast<std::size_t>(n_batches),
                                                 std::vector<double>(M, 0.0));
    std::vector<double> x;
    long b = 0, in_batch = 0;
    for (long i = 0; i < used; ++i) {
        stepper.step(nullptr, nullptr);
        stepper.state_real(x);
        for (std::size_t e = 0; e < M; ++e) batch_acc[e] += x[e] * x[e];
        if (++in_batch == batch_len) {
            for (std::size_t e = 0; e < M; ++e) {
                batch_means[static_cast<std::size_t>(b)][e] = batch_acc[e] / batch_len;
                batch_acc[e] = 0.0;
            }
            ++b;
            in_batch = 0;
        }
    }

    InvariantMeasureReport rep;
    rep.t_total = t_total;
    rep.burn_in = burn * p.dt;
    rep.pass = true;
    const double target = 0.5 * p.epsilon;
    for (std::size_t e = 0; e < M; ++e) {
        std::vector<double> bm(static_cast<std::size_t>(n_batches));
        for (int j = 0; j < n_batches; ++j) bm[static_cast<std::size_t>(j)] = batch_means[static_cast<std::size_t>(j)][e];
        auto ms = mean_se(bm);
        ModeMomentRow row;
        row.k = basis.mode[e];
        row.trig = basis.trig[e];
        row.mean_sq = ms.mean;
        row.se = ms.se;
        row.target = target;
        row.z = ms.se > 0.0 ? (ms.mean - target) / ms.se : 0.0;
        // Var(mean) = var1/ESS; batch SE estimates Var(mean) directly.
        double var1 = 2.0 * target * target;  // Gaussian X^2 variance at equilibrium
        row.ess = ms.se > 0.0 ? var1 / (ms.se * ms.se) : 0.0;
        if (std::abs(row.z) > z_limit) rep.pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

ReversibilityReport reversibility_test(const EnsembleConfig& cfg, double tau) {
    cfg.validate();
    const SqgParams& p = cfg.params;
    if (std::abs(p.beta - p.alpha / 2.0) > 1e-12 || p.delta != 0.0)
        throw std::invalid_argument("reversibility_test: requires beta = alpha/2 and delta = 0");
    const long steps_tau = std::lround(tau / p.dt);
    if (steps_tau < 1 || std::abs(steps_tau * p.dt - tau) > 1e-9)
        throw std::invalid_argument("reversibility_test: tau must be a positive multiple of dt");

    RealBasis basis = RealBasis::build(p.m);
    const std::size_t M = basis.size();
    auto find_entry = [&](ModeIndex q, Trig t) -> std::size_t {
        for (std::size_t e = 0; e < M; ++e)
            if (basis.mode[e] == q && basis.trig[e] == t) return e;
        throw std::invalid_argument("reversibility_test: panel mode outside the Galerkin band");
    };

    // Interacting triads plus quadratic-linear two-time statistics.
    struct Triple {
        std::size_t k, l, n;
        std::string name;
    };
    std::vector<Triple> triples;
    auto add_triple = [&](ModeIndex a, Trig ta, ModeIndex bq, Trig tb, ModeIndex c, Trig tc) {
        std::ostringstream nm;
        nm << "E[X(" << a.k1 << "," << a.k2 << (ta == Trig::Sin ? "s" : "c") << ")(0) X(" << bq.k1
           << "," << bq.k2 << (tb == Trig::Sin ? "s" : "c") << ")(tau) X(" << c.k1 << "," << c.k2
           << (tc == Trig::Sin ? "s" : "c") << ")(2tau)]";
        triples.push_back({find_entry(a, ta), find_entry(bq, tb), find_entry(c, tc), nm.str()});
    };
    add_triple({1, 0}, Trig::Cos, {0, 1}, Trig::Cos, {1, 1}, Trig::Sin);
    add_triple({1, 0}, Trig::Sin, {0, 1}, Trig::Cos, {1, 1}, Trig::Cos);
    add_triple({1, 0}, Trig::Cos, {0, 1}, Trig::Sin, {1, 1}, Trig::Cos);
    add_triple({1, 1}, Trig::Sin, {1, 0}, Trig::Cos, {0, 1}, Trig::Cos);
    add_triple({-1, 1}, Trig::Sin, {1, 0}, Trig::Cos, {0, 1}, Trig::Sin);
    add_triple({1, 0}, Trig::Cos, {1, 0}, Trig::Cos, {2, 0}, Trig::Cos);
    add_triple({1, 0}, Trig::Sin, {1, 0}, Trig::Cos, {2, 0}, Trig::Sin);
    add_triple({0, 1}, Trig::Cos, {0, 1}, Trig::Cos, {0, 2}, Trig::Cos);

    // Same-time-pair statistics E[X_k(0) X_l(0) X_n(2tau)] on active triads:
    // their reversal defect measures the triad transfer current directly and
    // vanishes for the true dynamics by the antisymmetry of B.
    struct Pair3 {
        std::size_t k, l, n;
        std::string name;
    };
    std::vector<Pair3> pair3;
    auto add_pair3 = [&](ModeIndex a, Trig ta, ModeIndex bq, Trig tb, ModeIndex c, Trig tc) {
        std::ostringstream nm;
        nm << "E[X(" << a.k1 << "," << a.k2 << (ta == Trig::Sin ? "s" : "c") << ")(0) X(" << bq.k1
           << "," << bq.k2 << (tb == Trig::Sin ? "s" : "c") << ")(0) X(" << c.k1 << "," << c.k2
           << (tc == Trig::Sin ? "s" : "c") << ")(2tau)]";
        pair3.push_back({find_entry(a, ta), find_entry(bq, tb), find_entry(c, tc), nm.str()});
    };
    add_pair3({1, 0}, Trig::Cos, {0, 1}, Trig::Cos, {1, 1}, Trig::Sin);
    add_pair3({1, 0}, Trig::Sin, {0, 1}, Trig::Sin, {1, 1}, Trig::Sin);
    add_pair3({1, 0}, Trig::Sin, {0, 1}, Trig::Cos, {1, 1}, Trig::Cos);
    add_pair3({1, 0}, Trig::Cos, {0, 1}, Trig::Sin, {1, 1}, Trig::Cos);
    add_pair3({1, 1}, Trig::Sin, {-1, 1}, Trig::Sin, {0, 2}, Trig::Sin);
    add_pair3({1, 1}, Trig::Cos, {-1, 1}, Trig::Sin, {0, 2}, Trig::Cos);

    // Energy-lag asymmetry rows E[X_k(s)^2 X_n(t)^2] - E[X_n(s)^2 X_k(t)^2]:
    // the reversal (negation squares away) forces these to vanish for the
    // true dynamics, while a broken drift's cross-shell energy flux shows up
    // at first order. The cubic snapshot statistics alone have no power
    // against sign mutations of the drift tensor.
    std::vector<std::size_t> shell_lo, shell_hi;
    auto half_table = ModeTable::get(p.m);
    for (std::size_t e = 0; e < M; ++e) {
        int a2 = half_table->abs2(basis.half_index[e]);
        if (a2 <= 2) shell_lo.push_back(e);
        if (p.m >= 3 ? a2 == 5 : a2 == 4) shell_hi.push_back(e);
    }

    const int n = cfg.n_traj;
    const std::size_t n_tr = triples.size();
    const std::size_t n_p3 = pair3.size();
    // Per trajectory: the forward statistic, its reversal partner, and an
    // odd single-time moment per triple.
    std::vector<std::vector<double>> fwd(n_tr, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> rev(n_tr, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> odd(n_tr, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> p3f(n_p3, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> p3r(n_p3, std::vector<double>(n, 0.0));
    std::vector<double> easym(n, 0.0);

    parallel_for_streams(n, cfg.n_threads, [&](int i) {
        SimOptions opts;
        opts.drift = cfg.drift;
        opts.mutation = cfg.mutation;
        opts.stream = static_cast<std::uint32_t>(i);
        GalerkinStepper stepper(p, opts);
        stepper.reset(sample_gaussian_initial(p, static_cast<std::uint32_t>(i)));
        std::vector<double> x0, xt, x2t;
        stepper.state_real(x0);
        for (long s = 0; s < steps_tau; ++s) stepper.step(nullptr, nullptr);
        stepper.state_real(xt);
        for (long s = 0; s < steps_tau; ++s) stepper.step(nullptr, nullptr);
        stepper.state_real(x2t);
        for (std::size_t t = 0; t < n_tr; ++t) {
            const auto& tr = triples[t];
            fwd[t][i] = x0[tr.k] * xt[tr.l] * x2t[tr.n];
            // Negated-reversed path: X'(0) = -X(2tau), X'(tau) = -X(tau),
            // X'(2tau) = -X(0).
            rev[t][i] = -x2t[tr.k] * xt[tr.l] * x0[tr.n];
            odd[t][i] = x2t[tr.k] * x2t[tr.l] * x2t[tr.n];
        }
        for (std::size_t t = 0; t < n_p3; ++t) {
            const auto& tr = pair3[t];
            p3f[t][i] = x0[tr.k] * x0[tr.l] * x2t[tr.n];
            p3r[t][i] = -x2t[tr.k] * x2t[tr.l] * x0[tr.n];
        }
        double d = 0.0;
        auto window = [&](const std::vector<double>& a, const std::vector<double>& b) {
            for (std::size_t k : shell_lo)
                for (std::size_t q : shell_hi)
                    d += a[k] * a[k] * b[q] * b[q] - a[q] * a[q] * b[k] * b[k];
        };
        window(x0, xt);
        window(xt, x2t);
        window(x0, x2t);
        easym[i] = d;
    });

    ReversibilityReport rep;
    rep.pass = true;
    for (std::size_t t = 0; t < n_tr; ++t) {
        std::vector<double> d(n);
        for (int i = 0; i < n; ++i) d[i] = fwd[t][i] - rev[t][i];
        auto msd = mean_se(d);
        ReversibilityRow row;
        row.name = triples[t].name;
        row.forward = mean_se(fwd[t]).mean;
        row.reversed = mean_se(rev[t]).mean;
        row.diff = msd.mean;
        row.se = msd.se;
        row.z = msd.se > 0.0 ? msd.mean / msd.se : 0.0;
        if (std::abs(row.z) > rep.z_limit) rep.pass = false;
        rep.rows.push_back(row);

        auto mso = mean_se(odd[t]);
        ReversibilityRow orow;
        orow.name = "odd " + triples[t].name;
        orow.forward = mso.mean;
        orow.reversed = -mso.mean;
        orow.diff = 2.0 * mso.mean;
        orow.se = 2.0 * mso.se;
        orow.z = mso.se > 0.0 ? mso.mean / mso.se : 0.0;
        if (std::abs(orow.z) > rep.z_limit) rep.pass = false;
        rep.rows.push_back(orow);
    }
    for (std::size_t t = 0; t < n_p3; ++t) {
        std::vector<double> d(n);
        for (int i = 0; i < n; ++i) d[i] = p3f[t][i] - p3r[t][i];
        auto msd = mean_se(d);
        ReversibilityRow row;
        row.name = pair3[t].name;
        row.forward = mean_se(p3f[t]).mean;
        row.reversed = mean_se(p3r[t]).mean;
        row.diff = msd.mean;
        row.se = msd.se;
        row.z = msd.se > 0.0 ? msd.mean / msd.se : 0.0;
        if (std::abs(row.z) > rep.z_limit) rep.pass = false;
        rep.rows.push_back(row);
    }
    {
        auto ms = mean_se(easym);
        ReversibilityRow row;
        row.name = "cross-shell energy-lag asymmetry";
        row.forward = ms.mean;
        row.reversed = 0.0;
        row.diff = ms.mean;
        row.se = ms.se;
        row.z = ms.se > 0.0 ? ms.mean / ms.se : 0.0;
        if (std::abs(row.z) > rep.z_limit) rep.pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

TiltResult tilt_simulate(const TiltTarget& target, const EnsembleConfig& cfg) {
    cfg.validate();
    const SqgParams& p = cfg.params;
    if (p.delta != 0.0)
        throw std::invalid_argument("tilt_simulate: the Girsanov tilt is the delta = 0 Galerkin form");
    if (!(p.epsilon > 0.0)) throw std::invalid_argument("tilt_simulate: epsilon must be > 0");
    const int N = p.steps();
    if (target.g.size() != static_cast<std::size_t>(N) + 1)
        throw std::invalid_argument("tilt_simulate: control grid mismatch");
    for (const auto& v : target.g.values)
        if (v.kmax() != p.m) throw std::invalid_argument("tilt_simulate: control must live on the Galerkin band");

    RealBasis basis = RealBasis::build(p.m);
    const std::size_t M = basis.size();
    auto table = ModeTable::get(p.m);

    // Initial law G(P_m theta0, eps P_m / 2) on H^{alpha-2beta}: per-mode
    // means and variances.
    std::vector<double> mean_x(M), sigma(M);
    SpectralField th0 = galerkin_project(resample(target.theta0, p.m), p.m);
    for (std::size_t e = 0; e < M; ++e) {
        const std::size_t h = basis.half_index[e];
        mean_x[e] = th0.real_coeff(h, basis.trig[e]);
        sigma[e] = std::sqrt(0.5 * p.epsilon) *
                   std::pow(table->lambda(h), 2.0 * p.beta - p.alpha);
    }

    // Control in the real basis, per time index.
    std::vector<std::vector<double>> gre(static_cast<std::size_t>(N) + 1, std::vector<double>(M));
    std::vector<double> gsq(static_cast<std::size_t>(N) + 1, 0.0);
    for (int i = 0; i <= N; ++i) {
        for (std::size_t e = 0; e < M; ++e) {
            gre[i][e] = target.g.values[i].real_coeff(basis.half_index[e], basis.trig[e]);
            gsq[i] += gre[i][e] * gre[i][e];
        }
    }
    double s2 = 0.5 * (gsq.front() + gsq.back());
    for (int i = 1; i < N; ++i) s2 += gsq[i];
    s2 *= p.dt;  // int ||P_m g||^2 dt

    const int n = cfg.n_traj;
    std::vector<double> logz(n, 0.0), fval(n, 0.0), dval(n, 0.0);

    parallel_for_streams(n, cfg.n_threads, [&](int i) {
        SimOptions opts;
        opts.drift = cfg.drift;
        opts.mutation = cfg.mutation;
        opts.stream = static_cast<std::uint32_t>(i);
        GalerkinStepper stepper(p, opts);

        // Shifted Gaussian start.
        CounterRng rng(p.seed, static_cast<std::uint32_t>(i));
        SpectralField x0(p.m);
        double log_y0 = 0.0;
        for (std::size_t e = 0; e < M; ++e) {
            const std::size_t h = basis.half_index[e];
            auto z = rng.normal_pair(0, static_cast<std::uint32_t>(h), RngPurpose::InitialCondition);
            double zz = basis.trig[e] == Trig::Sin ? z.first : z.second;
            double x = mean_x[e] + sigma[e] * zz;
            x0.set_real_coeff(h, basis.trig[e], x);
            log_y0 += (mean_x[e] * x - 0.5 * mean_x[e] * mean_x[e]) / (sigma[e] * sigma[e]);
        }
        stepper.reset(x0);

        ObservableTracker obs(cfg);
        obs.start(stepper.state());
        double s1 = 0.0;
        for (int s = 0; s < N; ++s) {
            stepper.step(&target.g.values[s], &target.g.values[s + 1]);
            const auto& dw = stepper.last_noise();
            for (std::size_t e = 0; e < M; ++e) s1 += gre[s][e] * dw[e];
            obs.step(stepper.state());
        }
        fval[i] = obs.finish(stepper.state());
        logz[i] = s1 / std::sqrt(p.epsilon) + s2 / (2.0 * p.epsilon) + log_y0;
    });

    // Direct ensemble (no tilt) on an independent stream block.
    parallel_for_streams(n, cfg.n_threads, [&](int i) {
        SimOptions opts;
        opts.drift = cfg.drift;
        opts.mutation = cfg.mutation;
        opts.stream = static_cast<std::uint32_t>(n + i);
        GalerkinStepper stepper(p, opts);
        stepper.reset(sample_gaussian_initial(p, static_cast<std::uint32_t>(n + i)));
        ObservableTracker obs(cfg);
        obs.start(stepper.state());
        for (int s = 0; s < N; ++s) {
            stepper.step(nullptr, nullptr);
            obs.step(stepper.state());
        }
        dval[i] = obs.finish(stepper.state());
    });

    TiltResult res;
    std::vector<double> w(n), wf(n);
    double wsum = 0.0, w2sum = 0.0;
    for (int i = 0; i < n; ++i) {
        w[i] = std::exp(-logz[i]);
        wf[i] = w[i] * fval[i];
        wsum += w[i];
        w2sum += w[i] * w[i];
    }
    auto msw = mean_se(w);
    res.weight_mean = msw.mean;
    res.weight_se = msw.se;
    auto mswf = mean_se(wf);
    res.weighted_mean = mswf.mean;
    res.weighted_se = mswf.se;
    auto msd = mean_se(dval);
    res.direct_mean = msd.mean;
    res.direct_se = msd.se;
    res.ess = w2sum > 0.0 ? wsum * wsum / w2sum : 0.0;
    auto msz = mean_se(logz);
    res.entropy_estimate = p.epsilon * msz.mean;
    res.entropy_se = p.epsilon * msz.se;
    res.rate_bound = 0.5 * s2 +
                     std::pow(sobolev_norm(target.theta0, p.alpha - 2.0 * p.beta), 2);
    res.degenerate = res.ess < 10.0;
    return res;
}

SupermartingaleReport supermartingale_check(const ControlPath& phi, const EnsembleConfig& cfg,
                                            int n_checkpoints, double psi_scale, double psi_cap,
                                            double z_limit) {
    cfg.validate();
    const SqgParams& p = cfg.params;
    const int N = p.steps();
    if (phi.size() != static_cast<std::size_t>(N) + 1)
        throw std::invalid_argument("supermartingale_check: test function grid mismatch");
    if (!(psi_scale >= 0.0 && psi_scale < 1.0))
        throw std::invalid_argument("supermartingale_check: psi_scale must lie in [0,1)");

    RealBasis basis = RealBasis::build(p.m);
    const std::size_t M = basis.size();

    // Pre-tabulate phi in the real basis, its time derivative, Lambda^{2a} phi
    // and the running cost.
    const bool in_band = true;
    for (const auto& v : phi.values)
        if (v.kmax() != p.m)
            throw std::invalid_argument("supermartingale_check: phi must live on the Galerkin band");
    (void)in_band;

    Trajectory phit;
    phit.params = p;
    phit.times = phi.times;
    phit.states = phi.values;

    std::vector<std::vector<double>> phi_re(N + 1, std::vector<double>(M));
    std::vector<std::vector<double>> dphi_re(N + 1, std::vector<double>(M));
    std::vector<std::vector<double>> lphi_re(N + 1, std::vector<double>(M));
    std::vector<double> cost(N + 1, 0.0);
    auto to_real = [&](const SpectralField& f, std::vector<double>& out) {
        for (std::size_t e = 0; e < M; ++e)
            out[e] = f.real_coeff(basis.half_index[e], basis.trig[e]);
    };
    for (int i = 0; i <= N; ++i) {
        to_real(phi.values[i], phi_re[i]);
        SpectralField d(p.m);
        const double dt = p.dt;
        if (i == 0) {
            d.axpy(-1.5 / dt, phi.values[0]);
            d.axpy(2.0 / dt, phi.values[1]);
            d.axpy(-0.5 / dt, phi.values[2]);
        } else if (i == N) {
            d.axpy(1.5 / dt, phi.values[N]);
            d.axpy(-2.0 / dt, phi.values[N - 1]);
            d.axpy(0.5 / dt, phi.values[N - 2]);
        } else {
            d.axpy(0.5 / dt, phi.values[i + 1]);
            d.axpy(-0.5 / dt, phi.values[i - 1]);
        }
        to_real(d, dphi_re[i]);
        to_real(apply_lambda(phi.values[i], 2.0 * p.alpha), lphi_re[i]);
        cost[i] = std::pow(sobolev_norm(phi.values[i], 2.0 * p.beta), 2);
    }

    std::vector<int> cp_index;
    for (int c = 1; c <= n_checkpoints; ++c) cp_index.push_back(c * N / n_checkpoints);

    const int n = cfg.n_traj;
    std::vector<std::vector<double>> q(cp_index.size(), std::vector<double>(n, 0.0));
    std::vector<double> lambda0s(n, 0.0);

    parallel_for_streams(n, cfg.n_threads, [&](int i) {
        SimOptions opts;
        opts.drift = cfg.drift;
        opts.mutation = cfg.mutation;
        opts.stream = static_cast<std::uint32_t>(i);
        GalerkinStepper stepper(p, opts);
        stepper.reset(initial_state(cfg, static_cast<std::uint32_t>(i)));

        const double s_lo = p.alpha - 2.0 * p.beta;
        double lam0 = psi_scale * std::min(std::pow(sobolev_norm(stepper.state(), s_lo), 2), psi_cap);
        lambda0s[i] = lam0;

        std::vector<double> x, drift;
        stepper.state_real(x);
        double x0_phi0 = 0.0;
        for (std::size_t e = 0; e < M; ++e) x0_phi0 += x[e] * phi_re[0][e];

        auto integrand = [&](const std::vector<double>& xr, int ti) {
            stepper.drift(stepper.state(), drift);
            double v = 0.0;
            for (std::size_t e = 0; e < M; ++e) {
                // -<theta, d_t phi> + <theta, Lambda^{2a} phi> + <N(theta), phi>
                v += -xr[e] * dphi_re[ti][e] + xr[e] * lphi_re[ti][e] - drift[e] * phi_re[ti][e];
            }
            return v;
        };

        double acc = 0.0;       // int of the weak-form integrand
        double cost_acc = 0.0;  // int ||phi||^2_{H^{2beta}}
        double prev = integrand(x, 0);
        double prev_cost = cost[0];
        std::size_t cp = 0;
        for (int s = 0; s < N; ++s) {
            stepper.step(nullptr, nullptr);
            stepper.state_real(x);
            double cur = integrand(x, s + 1);
            acc += 0.5 * p.dt * (prev + cur);
            cost_acc += 0.5 * p.dt * (prev_cost + cost[s + 1]);
            prev = cur;
            prev_cost = cost[s + 1];
            if (cp < cp_index.size() && s + 1 == cp_index[cp]) {
                double xt_phit = 0.0;
                for (std::size_t e = 0; e < M; ++e) xt_phit += x[e] * phi_re[s + 1][e];
                double f_t = xt_phit - x0_phi0 + acc;
                q[cp][i] = std::exp((f_t + lam0 - 0.5 * cost_acc) / p.epsilon);
                ++cp;
            }
        }
    });

    SupermartingaleReport rep;
    rep.nonincreasing = true;
    auto msl = mean_se(lambda0s);
    rep.lambda0 = msl.mean;
    for (std::size_t c = 0; c < cp_index.size(); ++c) {
        rep.times.push_back(cp_index[c] * p.dt);
        auto ms = mean_se(q[c]);
        rep.mean_q.push_back(ms.mean);
        rep.se_q.push_back(ms.se);
    }
    for (std::size_t c = 0; c + 1 < cp_index.size(); ++c) {
        std::vector<double> d(n);
        for (int i = 0; i < n; ++i) d[i] = q[c + 1][i] - q[c][i];
        auto ms = mean_se(d);
        double z = ms.se > 0.0 ? ms.mean / ms.se : 0.0;
        rep.increment_z.push_back(z);
        if (z > z_limit) rep.nonincreasing = false;
    }
    return rep;
}

ExpMomentResult gaussian_exp_moment(double eta, const SqgParams& p, int n_draws, int n_threads) {
    p.validate();
    if (!(p.epsilon > 0.0)) throw std::invalid_argument("gaussian_exp_moment: epsilon must be > 0");
    NoiseSpec spec = noise_spec(p);
    auto table = ModeTable::get(p.m);
    double lam_max = 0.0;
    for (std::size_t h = 0; h < table->size(); ++h) lam_max = std::max(lam_max, spec.lambda[h]);
    const double eta_bound = 1.0 / (lam_max * lam_max);
    if (!(eta >= 0.0) || eta >= eta_bound)
        throw std::invalid_argument("gaussian_exp_moment: eta outside the integrability range");

    ExpMomentResult res;
    res.n_draws = n_draws;
    double analytic = 0.0;
    for (std::size_t h = 0; h < table->size(); ++h) {
        if (table->abs2(h) > p.m * p.m) continue;
        double l2 = spec.lambda[h] * spec.lambda[h];
        // Two real modes (sin and cos) per half-lattice point.
        analytic += -p.epsilon * std::log(1.0 - eta * l2);
    }
    res.analytic = analytic;

    if (eta == 0.0) {
        res.mc = 0.0;
        res.mc_se = 0.0;
        return res;
    }

    const double s_lo = p.alpha - 2.0 * p.beta;
    std::vector<double> v(n_draws, 0.0);
    parallel_for_streams(n_draws, n_threads, [&](int i) {
        SpectralField th = sample_gaussian_initial(p, static_cast<std::uint32_t>(i));
        v[i] = std::exp(eta / p.epsilon * std::pow(sobolev_norm(th, s_lo), 2));
    });
    auto ms = mean_se(v);
    res.mc = p.epsilon * std::log(ms.mean);
    res.mc_se = ms.mean > 0.0 ? p.epsilon * ms.se / ms.mean : 0.0;
    return res;
}

}  // namespace sqg
