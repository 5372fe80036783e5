// Monte-Carlo layer: ensembles with counter-based streams, stationary and
// time-reversibility statistics, Girsanov-tilted importance sampling with
// entropy accounting, supermartingale diagnostics and Gaussian exponential
// moments.

#pragma once

#include <functional>
#include <string>

#include "sqg/dynamics.hpp"
#include "sqg/rate.hpp"

namespace sqg {

enum class Observable {
    One,                    // constant 1 (normalisation probe)
    SupNorm,                // sup_t ||theta(t)||_{H^{alpha-2beta}}
    TerminalNorm,           // ||theta(T)||_{H^{alpha-2beta}}
    TimeIntegratedHighNorm, // int_0^T ||theta||^2_{H^{2alpha-2beta}} dt
    TerminalMode,           // real coefficient of a designated mode at T
};

Observable observable_from_name(const std::string& name);
std::string observable_name(Observable o);

enum class InitialLaw { Gaussian, Fixed, Zero };

struct EnsembleConfig {
    int n_traj = 100;
    SqgParams params;
    Observable functional = Observable::TerminalNorm;
    double threshold = 1.0;
    DriftMode drift = DriftMode::Spectral;
    DriftMutation mutation = DriftMutation::None;
    InitialLaw initial = InitialLaw::Gaussian;
    SpectralField initial_field;  // used when initial == Fixed
    ModeIndex obs_mode{1, 0};
    Trig obs_trig = Trig::Cos;
    int n_threads = 0;  // 0: hardware concurrency

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    double p_hat = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    double eps_log_p = 0.0;  // epsilon * log p_hat; upper-bound flavour when no hits
    long hits = 0;
    bool zero_hits = false;
};

McEstimate mc_estimate(const EnsembleConfig& cfg);

struct ModeMomentRow {
    ModeIndex k;
    Trig trig;
    double mean_sq = 0.0;
    double se = 0.0;      // batch-mean (autocorrelation-adjusted) standard error
    double target = 0.0;  // eps/2
    double z = 0.0;
    double ess = 0.0;
};

struct InvariantMeasureReport {
    std::vector<ModeMomentRow> rows;
    bool pass = false;
    double t_total = 0.0;
    double burn_in = 0.0;
};

// One long stationary run; per-mode second moments against eps/2 with
// batch-mean standard errors. Burn-in fraction discarded up front.
InvariantMeasureReport invariant_measure_test(const SqgParams& p, double t_total,
                                              const SimOptions& opts = {},
                                              double burn_in_frac = 0.2, int n_batches = 64,
                                              double z_limit = 3.0);

struct ReversibilityRow {
    std::string name;
    double forward = 0.0;
    double reversed = 0.0;
    double diff = 0.0;
    double se = 0.0;
    double z = 0.0;
};

struct ReversibilityReport {
    std::vector<ReversibilityRow> rows;
    bool pass = false;
    double z_limit = 4.0;
};

// Triple-correlation panel E[X_k(0) X_l(tau) X_n(2 tau)] compared with its
// negated-reversed counterpart on a common ensemble, plus signed single-time
// odd moments. Requires beta = alpha/2 and delta = 0.
ReversibilityReport reversibility_test(const EnsembleConfig& cfg, double tau);

struct TiltTarget {
    SpectralField theta0;
    ControlPath g;
};

struct TiltResult {
    double weighted_mean = 0.0;
    double weighted_se = 0.0;
    double direct_mean = 0.0;
    double direct_se = 0.0;
    double weight_mean = 0.0;  // mean of dmu/dpi; 1 in expectation
    double weight_se = 0.0;
    double ess = 0.0;
    double entropy_estimate = 0.0;  // eps * mean(log Z)
    double entropy_se = 0.0;        // eps * se(log Z)
    double rate_bound = 0.0;        // (1/2) int ||P_m g||^2 + ||theta0||^2_{H^{alpha-2beta}}
    bool degenerate = false;
};

// Importance sampling under the Girsanov-tilted dynamics (delta = 0 Galerkin
// form): controlled SDE started from the shifted Gaussian initial law.
TiltResult tilt_simulate(const TiltTarget& target, const EnsembleConfig& cfg);

struct SupermartingaleReport {
    std::vector<double> times;
    std::vector<double> mean_q;
    std::vector<double> se_q;
    // z-scores of the paired increments mean(Q(t_{j+1}) - Q(t_j)); the
    // supermartingale property asks for them to be <= z_limit.
    std::vector<double> increment_z;
    bool nonincreasing = false;
    double lambda0 = 0.0;
};

// Ensemble mean of Q^{psi,phi}(t) at evenly spaced checkpoints; psi enters
// through its closed-form normalisation psi(x) = psi_scale * min(||x||^2, cap)
// which has lambda(psi) = 0 for psi_scale < 1.
SupermartingaleReport supermartingale_check(const ControlPath& phi, const EnsembleConfig& cfg,
                                            int n_checkpoints = 8, double psi_scale = 0.0,
                                            double psi_cap = 1.0, double z_limit = 3.0);

struct ExpMomentResult {
    double analytic = 0.0;
    double mc = 0.0;
    double mc_se = 0.0;
    int n_draws = 0;
};

// eps log E exp{(eta/eps) ||theta0||^2_{H^{alpha-2beta}}} for theta0 ~
// G(0, eps Q_delta/2) truncated at m: analytic closed form and an MC check.
ExpMomentResult gaussian_exp_moment(double eta, const SqgParams& p, int n_draws = 100000,
                                    int n_threads = 0);

// Deterministic parallel map over trajectory streams.
void parallel_for_streams(int n, int n_threads, const std::function<void(int)>& work);

}  // namespace sqg
