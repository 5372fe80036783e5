// Command-line front end: reproducible experiment drivers over the core
// library, each writing CSV outputs plus a run manifest.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sqg/io.hpp"
#include "sqg/montecarlo.hpp"
#include "sqg/quasipotential.hpp"
#include "sqg/rate.hpp"

namespace fs = std::filesystem;
using namespace sqg;

namespace {

constexpr const char* kVersion = "sqg 0.1.0";

std::string now_iso() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    bool json_manifest = false;
    SqgParams params;
    std::map<std::string, bool> overridden;

    RunManifest manifest;

    void add_flags(CLI::App* app) {
        app->add_option("--config", config_path, "key=value parameter file");
        app->add_option("--out-dir", out_dir, "output directory");
        app->add_flag("--json-manifest", json_manifest, "write the manifest as JSON");
        // CLI flags override config file values.
        app->add_option("--alpha", params.alpha)->each([this](std::string) { overridden["alpha"] = true; });
        app->add_option("--beta", params.beta)->each([this](std::string) { overridden["beta"] = true; });
        app->add_option("--epsilon", params.epsilon)->each([this](std::string) { overridden["epsilon"] = true; });
        app->add_option("--delta", params.delta)->each([this](std::string) { overridden["delta"] = true; });
        app->add_option("--s-reg", params.s_reg)->each([this](std::string) { overridden["s_reg"] = true; });
        app->add_option("--m", params.m)->each([this](std::string) { overridden["m"] = true; });
        app->add_option("--T", params.T)->each([this](std::string) { overridden["T"] = true; });
        app->add_option("--dt", params.dt)->each([this](std::string) { overridden["dt"] = true; });
        app->add_option("--seed", params.seed)->each([this](std::string) { overridden["seed"] = true; });
        app->add_option("--grid-factor", params.grid_factor)->each([this](std::string) { overridden["grid_factor"] = true; });
    }

    void finalize(const std::string& command) {
        if (!config_path.empty()) {
            Config c = config_load(config_path);
            SqgParams file = c.params;
            // Flags win over file values.
            if (!overridden.count("alpha")) params.alpha = file.alpha;
            if (!overridden.count("beta")) params.beta = file.beta;
            if (!overridden.count("epsilon")) params.epsilon = file.epsilon;
            if (!overridden.count("delta")) params.delta = file.delta;
            if (!overridden.count("s_reg")) params.s_reg = file.s_reg;
            if (!overridden.count("m")) params.m = file.m;
            if (!overridden.count("T")) params.T = file.T;
            if (!overridden.count("dt")) params.dt = file.dt;
            if (!overridden.count("seed")) params.seed = file.seed;
            if (!overridden.count("grid_factor")) params.grid_factor = file.grid_factor;
            manifest.inputs[config_path] = file_digest(config_path);
        }
        params.validate();
        fs::create_directories(out_dir);
        manifest.tool_version = kVersion;
        manifest.command = command;
        manifest.params = params;
        manifest.started_at = now_iso();
    }

    std::string path(const std::string& name) const { return (fs::path(out_dir) / name).string(); }

    void note_input(const std::string& p) { manifest.inputs[p] = file_digest(p); }
    void note_output(const std::string& p) { manifest.outputs[p] = file_digest(p); }

    void write_manifest() {
        manifest.finished_at = now_iso();
        std::string mp = path(json_manifest ? "manifest.json" : "manifest.txt");
        save_manifest(manifest, mp, json_manifest);
    }
};

SpectralField initial_field(const std::string& theta0_path, const std::string& init,
                            const SqgParams& p, Common& common) {
    if (!theta0_path.empty()) {
        common.note_input(theta0_path);
        return load_field(theta0_path);
    }
    if (init == "zero" || init.empty()) return SpectralField(p.m);
    if (init == "gaussian") return sample_gaussian_initial(p, 0);
    if (init.rfind("single:", 0) == 0) {
        std::string spec = init.substr(7);
        int k1 = 0, k2 = 0;
        double amp = 1.0;
        char trig = 's';
        if (std::sscanf(spec.c_str(), "%d,%d,%lf,%c", &k1, &k2, &amp, &trig) < 2)
            throw CLI::ValidationError("--init", "expected single:k1,k2[,amp[,s|c]]");
        SpectralField f(p.m);
        int h = f.table().index_of(in_half_lattice({k1, k2}) ? ModeIndex{k1, k2} : conj_mode({k1, k2}));
        if (h < 0) throw CLI::ValidationError("--init", "mode outside the band");
        f.set_real_coeff(static_cast<std::size_t>(h), trig == 'c' ? Trig::Cos : Trig::Sin, amp);
        return f;
    }
    throw CLI::ValidationError("--init", "unknown initial condition: " + init);
}

DriftMode drift_from_name(const std::string& s) {
    if (s == "spectral") return DriftMode::Spectral;
    if (s == "tensor") return DriftMode::Tensor;
    if (s == "off") return DriftMode::Off;
    throw CLI::ValidationError("--drift", "expected spectral, tensor or off");
}

int run_simulate(Common& common, const std::string& theta0_path, const std::string& init,
                 const std::string& control_path, const std::string& drift_name, int stride,
                 bool audit) {
    common.finalize("simulate");
    SpectralField th0 = initial_field(theta0_path, init, common.params, common);
    ControlPath g;
    bool has_g = !control_path.empty();
    if (has_g) {
        common.note_input(control_path);
        g = load_control(control_path);
    }
    SimOptions opts;
    opts.drift = drift_from_name(drift_name);
    opts.record_noise = audit;
    SdeRun run = simulate_sde(th0, common.params, has_g ? &g : nullptr, opts);
    std::string tp = common.path("trajectory.sqgt");
    save_trajectory(run.trajectory, tp, stride);
    common.note_output(tp);
    std::vector<double> residual;
    if (audit) residual = energy_identity_residual(run.trajectory, run.noise_increments);
    std::string dp = common.path("diagnostics.csv");
    save_diagnostics_csv(run.trajectory, residual, dp);
    common.note_output(dp);
    common.write_manifest();
    return 0;
}

int run_skeleton(Common& common, const std::string& theta0_path, const std::string& init,
                 const std::string& control_path, const std::string& drift_name) {
    common.finalize("skeleton");
    SpectralField th0 = initial_field(theta0_path, init, common.params, common);
    ControlPath g;
    bool has_g = !control_path.empty();
    if (has_g) {
        common.note_input(control_path);
        g = load_control(control_path);
    }
    SimOptions opts;
    opts.drift = drift_from_name(drift_name);
    Trajectory traj = solve_skeleton(th0, has_g ? &g : nullptr, common.params, opts);
    std::string tp = common.path("trajectory.sqgt");
    save_trajectory(traj, tp);
    common.note_output(tp);
    std::string dp = common.path("diagnostics.csv");
    save_diagnostics_csv(traj, {}, dp);
    common.note_output(dp);
    common.write_manifest();
    return 0;
}

int run_rate(Common& common, const std::string& traj_path, bool save_ctrl) {
    common.finalize("rate");
    common.note_input(traj_path);
    Trajectory traj = load_trajectory(traj_path);
    RateReport rep = rate(traj);
    std::string rp = common.path("rate.csv");
    {
        std::ofstream os(rp);
        os << "i0,i_dyna,total\n";
        os << format_double(rep.i0) << "," << format_double(rep.i_dyna) << ","
           << format_double(rep.total) << "\n";
    }
    common.note_output(rp);
    std::string pp = common.path("residual_norms.csv");
    {
        std::ofstream os(pp);
        os << "t,residual_norm\n";
        for (std::size_t i = 0; i < rep.per_step_residual_norm.size(); ++i)
            os << format_double(traj.times[i]) << "," << format_double(rep.per_step_residual_norm[i])
               << "\n";
    }
    common.note_output(pp);
    if (save_ctrl) {
        std::string cp = common.path("recovered_control.sqgc");
        save_control(rep.recovered_control, traj.params, cp);
        common.note_output(cp);
    }
    std::cout << "i0=" << format_double(rep.i0) << " i_dyna=" << format_double(rep.i_dyna)
              << " total=" << format_double(rep.total) << "\n";
    common.write_manifest();
    return 0;
}

int run_reverse(Common& common, const std::string& traj_path, const std::string& control_path) {
    common.finalize("reverse");
    common.note_input(traj_path);
    Trajectory traj = load_trajectory(traj_path);
    Trajectory rev = time_reverse(traj);
    std::string tp = common.path("reversed.sqgt");
    save_trajectory(rev, tp);
    common.note_output(tp);
    if (!control_path.empty()) {
        common.note_input(control_path);
        ControlPath g = load_control(control_path);
        ControlPath gt = reversed_control(traj, g);
        std::string cp = common.path("reversed_control.sqgc");
        save_control(gt, traj.params, cp);
        common.note_output(cp);
    }
    common.write_manifest();
    return 0;
}

int run_energy_audit(Common& common, const std::string& traj_path, const std::string& control_path,
                     const std::string& theta0_path, const std::string& init,
                     const std::string& drift_name) {
    common.finalize("energy-audit");
    std::string op = common.path("energy_audit.csv");
    if (!traj_path.empty()) {
        // Deterministic balance of a stored (trajectory, control) pair.
        if (control_path.empty())
            throw CLI::ValidationError("--control", "energy-audit on a stored trajectory needs its control");
        common.note_input(traj_path);
        common.note_input(control_path);
        Trajectory traj = load_trajectory(traj_path);
        ControlPath g = load_control(control_path);
        double gen = energy_residual(traj, g, EnergyMode::Generalized);
        std::ofstream os(op);
        os << "balance,residual\n";
        os << "generalized," << format_double(gen) << "\n";
        if (std::abs(traj.params.beta - traj.params.alpha / 2.0) < 1e-12) {
            double kin = energy_residual(traj, g, EnergyMode::Kinetic);
            os << "kinetic," << format_double(kin) << "\n";
        }
    } else {
        // Fresh stochastic run with recorded increments, audited pathwise.
        SpectralField th0 = initial_field(theta0_path, init, common.params, common);
        SimOptions opts;
        opts.drift = drift_from_name(drift_name);
        opts.record_noise = true;
        SdeRun run = simulate_sde(th0, common.params, nullptr, opts);
        std::vector<double> residual = energy_identity_residual(run.trajectory, run.noise_increments);
        save_diagnostics_csv(run.trajectory, residual, op);
    }
    common.note_output(op);
    common.write_manifest();
    return 0;
}

int run_quasipotential(Common& common, const std::string& phi_path, const std::string& init,
                       double tol_rel, const std::string& drift_name) {
    common.finalize("quasipotential");
    SpectralField phi = initial_field(phi_path, init, common.params, common);
    SimOptions opts;
    opts.drift = drift_from_name(drift_name);
    QuasiPotentialReport rep = quasi_potential(phi, common.params, tol_rel, opts);
    std::string op = common.path("quasipotential.csv");
    {
        std::ofstream os(op);
        os << "phi_norm_sq,u_estimate,tail,dt,t_star,rel_gap\n";
        os << format_double(rep.phi_norm_sq) << "," << format_double(rep.u_estimate) << ","
           << format_double(rep.tail) << "," << format_double(common.params.dt) << ","
           << format_double(rep.t_star) << "," << format_double(rep.rel_gap) << "\n";
    }
    common.note_output(op);
    std::cout << "U=" << format_double(rep.u_estimate)
              << " phi_norm_sq=" << format_double(rep.phi_norm_sq)
              << " rel_gap=" << format_double(rep.rel_gap) << "\n";
    common.write_manifest();
    return 0;
}

int run_invariance(Common& common, double t_total, const std::string& drift_name, double z_limit) {
    common.finalize("invariance-test");
    SimOptions opts;
    opts.drift = drift_from_name(drift_name);
    InvariantMeasureReport rep = invariant_measure_test(common.params, t_total, opts, 0.2, 64, z_limit);
    std::string op = common.path("invariance.csv");
    {
        std::ofstream os(op);
        os << "k1,k2,trig,mean_sq,se,target,z,ess,pass\n";
        for (const auto& r : rep.rows)
            os << r.k.k1 << "," << r.k.k2 << "," << (r.trig == Trig::Sin ? "sin" : "cos") << ","
               << format_double(r.mean_sq) << "," << format_double(r.se) << ","
               << format_double(r.target) << "," << format_double(r.z) << ","
               << format_double(r.ess) << "," << (std::abs(r.z) <= z_limit ? "PASS" : "FAIL") << "\n";
    }
    common.note_output(op);
    std::cout << (rep.pass ? "PASS" : "FAIL") << " invariance test over " << rep.rows.size()
              << " modes\n";
    common.write_manifest();
    return rep.pass ? 0 : 3;
}

int run_reversibility(Common& common, int n_traj, double tau, const std::string& drift_name,
                      bool mutate) {
    common.finalize("reversibility-test");
    EnsembleConfig cfg;
    cfg.params = common.params;
    cfg.n_traj = n_traj;
    cfg.drift = drift_from_name(drift_name);
    cfg.mutation = mutate ? DriftMutation::FlipSign : DriftMutation::None;
    ReversibilityReport rep = reversibility_test(cfg, tau);
    std::string op = common.path("reversibility.csv");
    {
        std::ofstream os(op);
        os << "statistic,forward,reversed,diff,se,z,pass\n";
        for (const auto& r : rep.rows)
            os << "\"" << r.name << "\"," << format_double(r.forward) << ","
               << format_double(r.reversed) << "," << format_double(r.diff) << ","
               << format_double(r.se) << "," << format_double(r.z) << ","
               << (std::abs(r.z) <= rep.z_limit ? "PASS" : "FAIL") << "\n";
    }
    common.note_output(op);
    std::cout << (rep.pass ? "PASS" : "FAIL") << " reversibility panel (" << rep.rows.size()
              << " statistics)\n";
    common.write_manifest();
    return rep.pass ? 0 : 3;
}

int run_tilt(Common& common, const std::string& theta0_path, const std::string& control_path,
             int n_traj, const std::string& functional, double threshold,
             const std::string& drift_name) {
    common.finalize("tilt");
    TiltTarget target;
    target.theta0 = theta0_path.empty() ? SpectralField(common.params.m) : load_field(theta0_path);
    if (!theta0_path.empty()) common.note_input(theta0_path);
    if (control_path.empty()) throw CLI::ValidationError("--control", "tilt needs a control path");
    common.note_input(control_path);
    target.g = load_control(control_path);
    EnsembleConfig cfg;
    cfg.params = common.params;
    cfg.n_traj = n_traj;
    cfg.functional = observable_from_name(functional);
    cfg.threshold = threshold;
    cfg.drift = drift_from_name(drift_name);
    TiltResult res = tilt_simulate(target, cfg);
    std::string op = common.path("tilt.csv");
    {
        std::ofstream os(op);
        os << "weighted_mean,weighted_se,direct_mean,direct_se,weight_mean,weight_se,ess,"
              "entropy_estimate,rate_bound,degenerate\n";
        os << format_double(res.weighted_mean) << "," << format_double(res.weighted_se) << ","
           << format_double(res.direct_mean) << "," << format_double(res.direct_se) << ","
           << format_double(res.weight_mean) << "," << format_double(res.weight_se) << ","
           << format_double(res.ess) << "," << format_double(res.entropy_estimate) << ","
           << format_double(res.rate_bound) << "," << (res.degenerate ? 1 : 0) << "\n";
    }
    common.note_output(op);
    std::cout << "weighted=" << res.weighted_mean << " direct=" << res.direct_mean
              << " ess=" << res.ess << " entropy=" << res.entropy_estimate
              << " bound=" << res.rate_bound << (res.degenerate ? " (degenerate)" : "") << "\n";
    common.write_manifest();
    return 0;
}

int run_exp_moment(Common& common, double eta, int n_draws, double z_limit) {
    common.finalize("exp-moment");
    ExpMomentResult res = gaussian_exp_moment(eta, common.params, n_draws);
    double z = res.mc_se > 0.0 ? (res.mc - res.analytic) / res.mc_se : 0.0;
    std::string op = common.path("exp_moment.csv");
    {
        std::ofstream os(op);
        os << "eta,analytic,mc,mc_se,z\n";
        os << format_double(eta) << "," << format_double(res.analytic) << ","
           << format_double(res.mc) << "," << format_double(res.mc_se) << "," << format_double(z)
           << "\n";
    }
    common.note_output(op);
    std::cout << "analytic=" << res.analytic << " mc=" << res.mc << " z=" << z << "\n";
    common.write_manifest();
    return std::abs(z) <= z_limit ? 0 : 3;
}

int run_scaling_report(Common& common, const std::vector<double>& epsilons,
                       const std::vector<int>& ms, const std::vector<double>& deltas,
                       double threshold) {
    common.finalize("scaling-report");
    std::string op = common.path("scaling.csv");
    std::ofstream os(op);
    os << "epsilon,m,delta,diagnostic,hs_norm_sq,ok\n";
    SqgParams p = common.params;
    for (double eps : epsilons.empty() ? std::vector<double>{p.epsilon} : epsilons) {
        p.epsilon = eps;
        if (!deltas.empty()) {
            for (double d : deltas) {
                p.delta = d;
                auto r = scaling_ok(p, threshold);
                os << format_double(eps) << "," << p.m << "," << format_double(d) << ","
                   << format_double(r.diagnostic) << "," << format_double(hs_norm_sq(p)) << ","
                   << (r.ok ? 1 : 0) << "\n";
            }
        } else {
            for (int m : ms.empty() ? std::vector<int>{p.m} : ms) {
                p.m = m;
                p.delta = 0.0;
                auto r = scaling_ok(p, threshold);
                os << format_double(eps) << "," << m << ",0,"
                   << format_double(r.diagnostic) << "," << format_double(hs_norm_sq(p)) << ","
                   << (r.ok ? 1 : 0) << "\n";
            }
        }
    }
    os.close();
    common.note_output(op);
    common.write_manifest();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-spectral simulation and verification toolkit for the stochastic SQG "
                 "equation on the 2-torus"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;

    std::string theta0_path, init = "zero", control_path, traj_path, phi_path;
    std::string drift_name = "spectral", functional = "terminal-norm";
    int stride = 1, n_traj = 1000, n_draws = 100000;
    double tol_rel = 1e-3, t_total = 100.0, tau = 0.2, eta = 0.3, threshold = 1.0, z_limit = 3.0;
    bool audit = false, save_ctrl = false, mutate = false;
    std::vector<double> epsilons, deltas;
    std::vector<int> ms;

    auto add_common = [&](CLI::App* sub) {
        common.add_flags(sub);
        sub->add_option("--drift", drift_name, "drift evaluation: spectral, tensor or off");
    };

    auto* sim = app.add_subcommand("simulate", "integrate the stochastic Galerkin SDE");
    add_common(sim);
    sim->add_option("--theta0", theta0_path, "initial field (.sqgf)");
    sim->add_option("--init", init, "zero | gaussian | single:k1,k2[,amp[,s|c]]");
    sim->add_option("--control", control_path, "control path (.sqgc) for tilted dynamics");
    sim->add_option("--stride", stride, "snapshot stride in the trajectory file");
    sim->add_flag("--record-noise", audit, "record increments and audit the energy identity");

    auto* ske = app.add_subcommand("skeleton", "integrate the deterministic skeleton equation");
    add_common(ske);
    ske->add_option("--theta0", theta0_path, "initial field (.sqgf)");
    ske->add_option("--init", init, "zero | gaussian | single:k1,k2[,amp[,s|c]]");
    ske->add_option("--control", control_path, "control path (.sqgc)");

    auto* rat = app.add_subcommand("rate", "evaluate the rate functional of a trajectory");
    add_common(rat);
    rat->add_option("--traj", traj_path, "trajectory file (.sqgt)")->required();
    rat->add_flag("--control-out", save_ctrl, "also write the recovered control");

    auto* rev = app.add_subcommand("reverse", "negate and time-reverse a trajectory");
    add_common(rev);
    rev->add_option("--traj", traj_path, "trajectory file (.sqgt)")->required();
    rev->add_option("--control", control_path, "control to transport through the reversal");

    auto* aud = app.add_subcommand("energy-audit", "energy-balance residuals");
    add_common(aud);
    aud->add_option("--traj", traj_path, "stored trajectory (deterministic balance)");
    aud->add_option("--control", control_path, "control of the stored trajectory");
    aud->add_option("--theta0", theta0_path, "initial field for a fresh audited run");
    aud->add_option("--init", init, "zero | gaussian | single:...");

    auto* qp = app.add_subcommand("quasipotential", "relax, reverse and price a state");
    add_common(qp);
    qp->add_option("--phi", phi_path, "target field (.sqgf)");
    qp->add_option("--init", init, "zero | gaussian | single:...");
    qp->add_option("--tol-rel", tol_rel, "relative relaxation stopping tolerance");

    auto* inv = app.add_subcommand("invariance-test", "stationary second-moment check");
    add_common(inv);
    inv->add_option("--t-total", t_total, "total simulated time units");
    inv->add_option("--z-limit", z_limit, "per-mode z threshold");

    auto* rvt = app.add_subcommand("reversibility-test", "triple-correlation reversal panel");
    add_common(rvt);
    rvt->add_option("--n-traj", n_traj, "ensemble size");
    rvt->add_option("--tau", tau, "correlation lag (multiple of dt)");
    rvt->add_flag("--mutate-drift", mutate, "negative control: sign-flipped drift");

    auto* til = app.add_subcommand("tilt", "Girsanov-tilted importance sampling");
    add_common(til);
    til->add_option("--theta0", theta0_path, "target initial field (.sqgf)");
    til->add_option("--control", control_path, "tilting control (.sqgc)")->required();
    til->add_option("--n-traj", n_traj, "ensemble size");
    til->add_option("--functional", functional, "observable name");
    til->add_option("--threshold", threshold, "threshold for the event probability");

    auto* exm = app.add_subcommand("exp-moment", "Gaussian exponential moment check");
    add_common(exm);
    exm->add_option("--eta", eta, "moment parameter");
    exm->add_option("--n-draws", n_draws, "Monte Carlo draws");
    exm->add_option("--z-limit", z_limit, "acceptance threshold");

    auto* scl = app.add_subcommand("scaling-report", "scaling-regime sweep table");
    add_common(scl);
    scl->add_option("--epsilons", epsilons, "noise intensities to sweep");
    scl->add_option("--ms", ms, "Galerkin cutoffs to sweep");
    scl->add_option("--deltas", deltas, "regularizations to sweep");
    scl->add_option("--threshold", threshold, "diagnostic threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return run_simulate(common, theta0_path, init, control_path, drift_name, stride, audit);
        if (ske->parsed()) return run_skeleton(common, theta0_path, init, control_path, drift_name);
        if (rat->parsed()) return run_rate(common, traj_path, save_ctrl);
        if (rev->parsed()) return run_reverse(common, traj_path, control_path);
        if (aud->parsed()) return run_energy_audit(common, traj_path, control_path, theta0_path, init, drift_name);
        if (qp->parsed()) return run_quasipotential(common, phi_path, init, tol_rel, drift_name);
        if (inv->parsed()) return run_invariance(common, t_total, drift_name, z_limit);
        if (rvt->parsed()) return run_reversibility(common, n_traj, tau, drift_name, mutate);
        if (til->parsed()) return run_tilt(common, theta0_path, control_path, n_traj, functional, threshold, drift_name);
        if (exm->parsed()) return run_exp_moment(common, eta, n_draws, z_limit);
        if (scl->parsed()) return run_scaling_report(common, epsilons, ms, deltas, threshold);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const IntegrationError& e) {
        std::cerr << "numerical failure at t=" << e.failure_time << ": " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
