// Restricted quasi-potential: relax the unforced dynamics, reverse and
// negate the path, and evaluate the infinite-horizon cost on the truncation,
// with the tail reported as an explicit correction.

#pragma once

#include "sqg/dynamics.hpp"

namespace sqg {

struct RelaxationResult {
    Trajectory path;   // unforced solve on [0, T*]
    double t_star = 0.0;
    double tail = 0.0;  // ||theta(T*)||^2 in H^{alpha-2beta}
};

// Integrate the unforced Galerkin dynamics from phi until
// ||theta(t)||_{H^{alpha-2beta}} < tol_rel * ||phi||; p.T caps the horizon.
// Throws IntegrationError (carrying the final norm in the message) when the
// stopping rule never fires.
RelaxationResult relax(const SpectralField& phi, const SqgParams& p, double tol_rel,
                       const SimOptions& opts = {});

// (1/2) int || d_t theta + Lambda^{2alpha} theta + P_m N(theta) ||_{H^{-2beta}}^2
// over a path interpreted on (-T*, 0].
double s_cost(const Trajectory& reversed_path);

struct SCostSplit {
    double forward_residual_half_sq = 0.0;
    double boundary = 0.0;  // ||theta(0)||^2 - ||theta(-T*)||^2 in H^{alpha-2beta}
};

// The two terms of the telescoped identity; their sum matches s_cost up to
// O(dt^2).
SCostSplit s_cost_split(const Trajectory& reversed_path);

struct QuasiPotentialReport {
    double u_estimate = 0.0;
    double phi_norm_sq = 0.0;  // ||phi||^2 in H^{alpha-2beta}
    double tail = 0.0;
    double t_star = 0.0;
    double rel_gap = 0.0;  // |U - (||phi||^2 - tail)| / ||phi||^2
};

QuasiPotentialReport quasi_potential(const SpectralField& phi, const SqgParams& p, double tol_rel,
                                     const SimOptions& opts = {});

}  // namespace sqg
