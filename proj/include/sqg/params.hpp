// Physical and numerical parameters of the stochastic SQG system, the
// regularized noise spectrum and the scaling-regime bookkeeping.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqg/field.hpp"

namespace sqg {

struct SqgParams {
    double alpha = 0.5;    // fractional dissipation exponent, in (0,1)
    double beta = 0.25;    // noise exponent: alpha/2, or alpha/2 + 1/4 when alpha >= 1/2
    double epsilon = 0.0;  // noise intensity, >= 0
    double delta = 0.0;    // noise regularization, >= 0
    double s_reg = 2.0;    // regularization order, > alpha + 1
    int m = 1;             // Galerkin cutoff: modes 0 < |k| <= m
    double T = 1.0;        // time horizon
    double dt = 1e-2;      // step; T/dt must be an integer
    std::uint64_t seed = 0;

    double blowup_factor = 1e3;  // abort when ||theta||_L2 exceeds this multiple of the start
    int grid_factor = 2;         // physical grid oversampling for the advection product

    int steps() const;
    // Throws std::invalid_argument naming the offending key and constraint.
    void validate() const;
};

// beta must equal alpha/2, or alpha/2 + 1/4 when alpha >= 1/2.
bool beta_admissible(double alpha, double beta);

// Per-mode noise data for 0 < |k| <= m: lambda_{delta,k} = (1 + delta
// |2 pi k|^{2 s})^{-1/2} and the |2 pi k|^{2 beta} amplitude factor.
struct NoiseSpec {
    std::vector<double> lambda;           // per half-lattice mode of ModeTable(m), 0 where |k| > m
    std::vector<double> beta_multiplier;  // |2 pi k|^{2 beta}, same layout
    int m = 0;
};

NoiseSpec noise_spec(const SqgParams& p);

double lambda_delta(ModeIndex k, double delta, double s_reg);

// || Lambda^alpha sqrt(Q_delta) ||_HS^2 truncated at |k| <= cutoff
// (cutoff = p.m when not given).
double hs_norm_sq(const SqgParams& p);
double hs_norm_sq(double alpha, double delta, double s_reg, int cutoff);

struct ScalingReport {
    double diagnostic = 0.0;  // epsilon * delta^{-(alpha+1)/s}  (delta > 0)
                              // epsilon * m^{2+2alpha}           (delta = 0)
    double threshold = 0.0;
    bool ok = false;
};

ScalingReport scaling_ok(const SqgParams& p, double threshold = 1.0);

}  // namespace sqg
