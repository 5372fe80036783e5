#include "sqg/dynamics.hpp"

#include <cmath>
#include <map>

namespace sqg {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Complex-exponential expansion of the real basis function indexed by the
// full lattice: sin flavour on the positive half-lattice, cos on the other.
struct ExpCoeff {
    ModeIndex wave;
    cplx c;
};

std::array<ExpCoeff, 2> basis_expansion(ModeIndex q) {
    if (in_half_lattice(q)) {
        return {ExpCoeff{q, cplx(0.0, -1.0 / kSqrt2)}, ExpCoeff{conj_mode(q), cplx(0.0, 1.0 / kSqrt2)}};
    }
    return {ExpCoeff{q, cplx(1.0 / kSqrt2, 0.0)}, ExpCoeff{conj_mode(q), cplx(1.0 / kSqrt2, 0.0)}};
}

}  // namespace

SpectralField galerkin_project(const SpectralField& f, int m) {
    SpectralField out = f;
    const auto& t = f.table();
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t.abs2(i) > m * m) out.coeffs()[i] = cplx(0.0, 0.0);
    return out;
}

RealBasis RealBasis::build(int m) {
    RealBasis b;
    b.m = m;
    auto table = ModeTable::get(m);
    for (std::size_t i = 0; i < table->size(); ++i) {
        if (table->abs2(i) > m * m) continue;
        b.half_index.push_back(i);
        b.trig.push_back(Trig::Sin);
        b.mode.push_back(table->mode(i));
        b.half_index.push_back(i);
        b.trig.push_back(Trig::Cos);
        b.mode.push_back(table->mode(i));
    }
    return b;
}

double b_coefficient(ModeIndex k, ModeIndex l, ModeIndex n) {
    if ((k.k1 == 0 && k.k2 == 0) || (l.k1 == 0 && l.k2 == 0) || (n.k1 == 0 && n.k2 == 0))
        throw std::invalid_argument("b_coefficient: zero mode excluded");
    const auto ck = basis_expansion(k);
    const auto cl = basis_expansion(l);
    const auto cn = basis_expansion(n);
    const double abs_n = mode_abs(n);
    cplx acc(0.0, 0.0);
    for (const auto& w : cn) {
        for (const auto& v : cl) {
            const double cross = static_cast<double>(w.wave.k1) * v.wave.k2 -
                                 static_cast<double>(w.wave.k2) * v.wave.k1;
            if (cross == 0.0) continue;
            const cplx amp = w.c * v.c * (-2.0 * M_PI * cross / abs_n);
            const ModeIndex r{w.wave.k1 + v.wave.k1, w.wave.k2 + v.wave.k2};
            for (const auto& e : ck)
                if (e.wave == r) acc += amp * std::conj(e.c);
        }
    }
    return acc.real();
}

BTensor::BTensor(int m) : basis_(RealBasis::build(m)) {
    const std::size_t M = basis_.size();
    rows_.assign(M, {});
    // Map a full-lattice real index (wavevector, flavour) onto the basis slot.
    std::map<std::pair<std::pair<int, int>, int>, std::uint32_t> slot;
    auto real_index = [&](std::size_t e) {
        ModeIndex q = basis_.mode[e];
        return basis_.trig[e] == Trig::Sin ? q : conj_mode(q);
    };
    for (std::size_t e = 0; e < M; ++e) {
        ModeIndex q = real_index(e);
        slot[{{q.k1, q.k2}, 0}] = static_cast<std::uint32_t>(e);
    }
    std::vector<std::map<std::pair<std::uint32_t, std::uint32_t>, double>> acc(M);
    for (std::size_t ln = 0; ln < M; ++ln) {
        const auto cl = basis_expansion(real_index(ln));
        for (std::size_t nn = 0; nn < M; ++nn) {
            const auto cn = basis_expansion(real_index(nn));
            const double abs_n = mode_abs(basis_.mode[nn]);
            for (const auto& w : cn) {
                for (const auto& v : cl) {
                    const double cross = static_cast<double>(w.wave.k1) * v.wave.k2 -
                                         static_cast<double>(w.wave.k2) * v.wave.k1;
                    if (cross == 0.0) continue;
                    const cplx amp = w.c * v.c * (-2.0 * M_PI * cross / abs_n);
                    const ModeIndex r{w.wave.k1 + v.wave.k1, w.wave.k2 + v.wave.k2};
                    if (r.k1 == 0 && r.k2 == 0) continue;
                    if (r.k1 * r.k1 + r.k2 * r.k2 > m * m) continue;
                    // Both flavours of the target wavevector receive a share.
                    for (int flavour = 0; flavour < 2; ++flavour) {
                        ModeIndex q = flavour == 0 ? (in_half_lattice(r) ? r : conj_mode(r))
                                                   : (in_half_lattice(r) ? conj_mode(r) : r);
                        auto it = slot.find({{q.k1, q.k2}, 0});
                        if (it == slot.end()) continue;
                        const auto ce = basis_expansion(q);
                        cplx share(0.0, 0.0);
                        for (const auto& e : ce)
                            if (e.wave == r) share = amp * std::conj(e.c);
                        if (share.real() != 0.0) {
                            acc[it->second][{static_cast<std::uint32_t>(ln),
                                             static_cast<std::uint32_t>(nn)}] += share.real();
                        }
                    }
                }
            }
        }
    }
    for (std::size_t kk = 0; kk < M; ++kk) {
        for (const auto& [pair, b] : acc[kk])
            if (std::abs(b) > 1e-14) rows_[kk].push_back(Entry{pair.first, pair.second, b});
    }
}

void BTensor::contract(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(basis_.size(), 0.0);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        double s = 0.0;
        for (const auto& e : rows_[k]) s += e.b * x[e.l] * x[e.n];
        y[k] = s;
    }
}

GalerkinStepper::GalerkinStepper(const SqgParams& p, const SimOptions& opts)
    : params_(p), opts_(opts), basis_(RealBasis::build(p.m)), rng_(p.seed, opts.stream), state_(p.m) {
    params_.validate();
    if (opts_.drift == DriftMode::Tensor) tensor_.emplace(p.m);
    NoiseSpec spec = noise_spec(params_);
    const std::size_t M = basis_.size();
    exp_factor_.resize(M);
    lam2beta_.resize(M);
    noise_amp_.resize(M);
    auto table = ModeTable::get(params_.m);
    for (std::size_t e = 0; e < M; ++e) {
        const std::size_t h = basis_.half_index[e];
        const double lam = table->lambda(h);
        exp_factor_[e] = std::exp(-std::pow(lam, 2.0 * params_.alpha) * params_.dt);
        lam2beta_[e] = spec.beta_multiplier[h];
        noise_amp_[e] = std::sqrt(params_.epsilon) * spec.beta_multiplier[h] * spec.lambda[h];
    }
    xbuf_.resize(M);
    f0_.resize(M);
    f1_.resize(M);
    xstage_.resize(M);
    last_noise_.assign(M, 0.0);
}

void GalerkinStepper::reset(const SpectralField& theta0) {
    SpectralField f = galerkin_project(resample(theta0, params_.m), params_.m);
    state_ = std::move(f);
    step_count_ = 0;
    double n0 = l2_norm(state_);
    guard_norm_ = params_.blowup_factor * std::max(n0, 1.0);
}

void GalerkinStepper::state_real(std::vector<double>& x) const {
    x.resize(basis_.size());
    for (std::size_t e = 0; e < basis_.size(); ++e)
        x[e] = state_.real_coeff(basis_.half_index[e], basis_.trig[e]);
}

void GalerkinStepper::drift(const SpectralField& theta, std::vector<double>& out) const {
    const std::size_t M = basis_.size();
    out.assign(M, 0.0);
    if (opts_.drift == DriftMode::Off) return;
    if (opts_.drift == DriftMode::Tensor) {
        std::vector<double> x(M);
        for (std::size_t e = 0; e < M; ++e)
            x[e] = theta.real_coeff(basis_.half_index[e], basis_.trig[e]);
        tensor_->contract(x, out);
    } else {
        SpectralField adv = galerkin_project(advection(theta, params_.grid_factor), params_.m);
        for (std::size_t e = 0; e < M; ++e)
            out[e] = adv.real_coeff(basis_.half_index[e], basis_.trig[e]);
    }
    auto table = ModeTable::get(params_.m);
    for (std::size_t e = 0; e < M; ++e) {
        double sign = -1.0;
        if (opts_.mutation == DriftMutation::FlipSign) sign = 1.0;
        if (opts_.mutation == DriftMutation::FlipLowShell && table->abs2(basis_.half_index[e]) == 1)
            sign = 1.0;
        out[e] *= sign;
    }
}

void GalerkinStepper::step(const SpectralField* g_begin, const SpectralField* g_end) {
    const std::size_t M = basis_.size();
    const double dt = params_.dt;

    state_real(xbuf_);
    drift(state_, f0_);
    if (g_begin) {
        for (std::size_t e = 0; e < M; ++e)
            f0_[e] += lam2beta_[e] * g_begin->real_coeff(basis_.half_index[e], basis_.trig[e]);
    }

    SpectralField stage(params_.m);
    for (std::size_t e = 0; e < M; ++e) {
        xstage_[e] = exp_factor_[e] * (xbuf_[e] + dt * f0_[e]);
        stage.set_real_coeff(basis_.half_index[e], basis_.trig[e], xstage_[e]);
    }

    drift(stage, f1_);
    if (g_end) {
        for (std::size_t e = 0; e < M; ++e)
            f1_[e] += lam2beta_[e] * g_end->real_coeff(basis_.half_index[e], basis_.trig[e]);
    }

    const bool noisy = params_.epsilon > 0.0;
    double norm_sq = 0.0;
    SpectralField next(params_.m);
    for (std::size_t e = 0; e < M; ++e) {
        double x = exp_factor_[e] * (xbuf_[e] + 0.5 * dt * f0_[e]) + 0.5 * dt * f1_[e];
        if (noisy) {
            double dw;
            const std::size_t h = basis_.half_index[e];
            auto z = rng_.normal_pair(step_count_, static_cast<std::uint32_t>(h), RngPurpose::SdeNoise);
            dw = std::sqrt(dt) * (basis_.trig[e] == Trig::Sin ? z.first : z.second);
            last_noise_[e] = dw;
            x += noise_amp_[e] * dw;
        }
        next.set_real_coeff(basis_.half_index[e], basis_.trig[e], x);
        norm_sq += x * x;
    }
    state_ = std::move(next);
    ++step_count_;
    if (!(std::sqrt(norm_sq) <= guard_norm_))
        throw IntegrationError("blow-up guard tripped: ||theta||_L2 exceeded its bound", time());
}

namespace {

void check_control(const ControlPath* g, const SqgParams& p) {
    if (!g) return;
    if (g->size() != static_cast<std::size_t>(p.steps()) + 1)
        throw std::invalid_argument("control path must share the trajectory grid");
    for (const auto& v : g->values)
        if (v.kmax() != p.m) throw std::invalid_argument("control path must be truncated to the Galerkin cutoff");
}

}  // namespace

Trajectory solve_skeleton(const SpectralField& theta0, const ControlPath* g, const SqgParams& p,
                          const SimOptions& opts) {
    SimOptions o = opts;
    SqgParams pd = p;
    pd.epsilon = 0.0;
    pd.validate();
    check_control(g, pd);
    GalerkinStepper stepper(pd, o);
    stepper.reset(theta0);
    const int N = pd.steps();
    Trajectory traj;
    traj.params = pd;
    traj.times.reserve(N + 1);
    traj.states.reserve(N + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(stepper.state());
    for (int i = 0; i < N; ++i) {
        const SpectralField* gb = g ? &g->values[i] : nullptr;
        const SpectralField* ge = g ? &g->values[i + 1] : nullptr;
        stepper.step(gb, ge);
        traj.times.push_back(stepper.time());
        traj.states.push_back(stepper.state());
    }
    return traj;
}

SdeRun simulate_sde(const SpectralField& theta0, const SqgParams& p, const ControlPath* g,
                    const SimOptions& opts) {
    p.validate();
    check_control(g, p);
    GalerkinStepper stepper(p, opts);
    stepper.reset(theta0);
    const int N = p.steps();
    SdeRun run;
    run.trajectory.params = p;
    run.trajectory.times.reserve(N + 1);
    run.trajectory.states.reserve(N + 1);
    run.trajectory.times.push_back(0.0);
    run.trajectory.states.push_back(stepper.state());
    if (opts.record_noise) run.noise_increments.reserve(N);
    for (int i = 0; i < N; ++i) {
        const SpectralField* gb = g ? &g->values[i] : nullptr;
        const SpectralField* ge = g ? &g->values[i + 1] : nullptr;
        stepper.step(gb, ge);
        run.trajectory.times.push_back(stepper.time());
        run.trajectory.states.push_back(stepper.state());
        if (opts.record_noise) run.noise_increments.push_back(stepper.last_noise());
    }
    return run;
}

SpectralField sample_gaussian_initial(const SqgParams& p, std::uint32_t stream) {
    p.validate();
    if (!(p.epsilon > 0.0))
        throw std::invalid_argument("sample_gaussian_initial: epsilon must be positive");
    RealBasis basis = RealBasis::build(p.m);
    NoiseSpec spec = noise_spec(p);
    auto table = ModeTable::get(p.m);
    CounterRng rng(p.seed, stream);
    SpectralField f(p.m);
    for (std::size_t e = 0; e < basis.size(); ++e) {
        const std::size_t h = basis.half_index[e];
        const double lam = table->lambda(h);
        const double sigma = std::sqrt(0.5 * p.epsilon) * spec.lambda[h] *
                             std::pow(lam, 2.0 * p.beta - p.alpha);
        auto z = rng.normal_pair(0, static_cast<std::uint32_t>(h), RngPurpose::InitialCondition);
        f.set_real_coeff(h, basis.trig[e], sigma * (basis.trig[e] == Trig::Sin ? z.first : z.second));
    }
    return f;
}

std::vector<double> energy_identity_residual(const Trajectory& traj,
                                             const std::vector<std::vector<double>>& noise_increments) {
    const SqgParams& p = traj.params;
    const std::size_t N = traj.size() - 1;
    const bool noisy = p.epsilon > 0.0;
    if (noisy && noise_increments.size() != N)
        throw std::invalid_argument("energy_identity_residual: noise increments missing or mismatched");

    RealBasis basis = RealBasis::build(p.m);
    NoiseSpec spec = noise_spec(p);
    auto table = ModeTable::get(p.m);
    const double s_lo = p.alpha - 2.0 * p.beta;
    const double s_hi = 2.0 * p.alpha - 2.0 * p.beta;
    const double hs = hs_norm_sq(p);

    std::vector<double> res(N, 0.0);
    const double e0 = 0.5 * std::pow(sobolev_norm(traj.states[0], s_lo), 2);
    double dissip = 0.0;
    double mart = 0.0;
    double d_prev = std::pow(sobolev_norm(traj.states[0], s_hi), 2);
    for (std::size_t i = 0; i < N; ++i) {
        if (noisy) {
            const auto& st = traj.states[i];
            const auto& dw = noise_increments[i];
            double inc = 0.0;
            for (std::size_t e = 0; e < basis.size(); ++e) {
                const std::size_t h = basis.half_index[e];
                const double w = std::pow(table->lambda(h), s_hi) * spec.lambda[h];
                inc += w * st.real_coeff(h, basis.trig[e]) * dw[e];
            }
            mart += inc;
        }
        const double d_next = std::pow(sobolev_norm(traj.states[i + 1], s_hi), 2);
        dissip += 0.5 * p.dt * (d_prev + d_next);
        d_prev = d_next;
        const double t = traj.times[i + 1];
        const double e_t = 0.5 * std::pow(sobolev_norm(traj.states[i + 1], s_lo), 2);
        res[i] = e_t + dissip - e0 - std::sqrt(p.epsilon) * mart - 0.5 * p.epsilon * hs * t;
    }
    return res;
}

}  // namespace sqg
