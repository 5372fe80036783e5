// Large-deviations rate functional on discrete trajectories: control
// recovery, initial and dynamic costs, the variational lower-bound
// functional, time reversal, and the energy-balance residuals.

#pragma once

#include "sqg/dynamics.hpp"

namespace sqg {

struct RateReport {
    double i0 = 0.0;
    double i_dyna = 0.0;
    double total = 0.0;
    ControlPath recovered_control;
    // || g(t_i) ||_L2 = H^{-2beta} norm of the skeleton residual per step.
    std::vector<double> per_step_residual_norm;
};

// Unique control: g(t_i) = Lambda^{-2beta}(D_t theta + Lambda^{2alpha} theta
// + P_m N(theta)); central differences inside, one-sided second order at the
// endpoints. Needs at least two steps.
ControlPath recover_control(const Trajectory& traj);

RateReport rate(const Trajectory& traj);

// Lambda_1^T(phi, theta) = F^T(phi, theta) - (1/2) int ||phi||_{H^{2beta}}^2,
// with the nonlinear pairing evaluated through the commutator split at the
// dyadic level j (defaults to the middle of the admissible range).
double variational_functional(const Trajectory& traj, const ControlPath& phi);
double variational_functional(const Trajectory& traj, const ControlPath& phi, int j);

// T_T theta = -theta(T - .)
Trajectory time_reverse(const Trajectory& traj);

// g~(t) = g(T-t) - 2 Lambda^{2alpha-2beta} theta(T-t); the reversed
// trajectory solves the skeleton equation with this control.
ControlPath reversed_control(const Trajectory& traj, const ControlPath& g);

enum class EnergyMode { Kinetic, Generalized };

// Residual of the kinetic (beta = alpha/2 only) or H^{alpha-2beta} energy
// balance over [0, T], trapezoidal quadrature.
double energy_residual(const Trajectory& traj, const ControlPath& g, EnergyMode mode);

}  // namespace sqg
