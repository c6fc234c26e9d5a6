#pragma once

#include <utility>
#include <vector>

#include "stepwise/core.hpp"
#include "stepwise/problems.hpp"

namespace stepwise {

// Forward-backward sweep output on a node grid (flat, node-major like
// Trajectory).  Adjoints satisfy lambda(T) = 0 exactly at the last node.
struct SweepResult {
    TimeGrid grid;
    int n_x = 0;
    int m = 0;
    std::vector<double> states;    // (K+1) * n_x
    std::vector<double> controls;  // (K+1) * m
    std::vector<double> adjoints;  // (K+1) * n_x
    double raw_cost = 0.0;
    double minimized_cost = 0.0;
    int iterations = 0;
    bool converged = false;

    const double* state(int k) const { return states.data() + static_cast<std::size_t>(k) * n_x; }
    const double* control(int k) const {
        return controls.data() + static_cast<std::size_t>(k) * m;
    }
    const double* adjoint(int k) const {
        return adjoints.data() + static_cast<std::size_t>(k) * n_x;
    }
};

// Closed-form solution of the introductory problem's necessary conditions:
// lambda(t) = 2(e^{2-t} - 1),  u(t) = clamp(e^{2-t} - 2.5, 0, 2).
std::pair<double, double> intro_closed_form(double t);

// Adjoint dynamics lambda' = -dH/dx with H = L + lambda . f.  The same H
// serves both senses (the running cost keeps its native sign); only the
// pointwise control extremization differs — see characterize_control.
// Derivations for the chemotherapy and epidemic models are worked out in
// docs/math_notes.md and validated against finite differences of H in tests.
void adjoint_rhs(const OcpProblem& p, double t, const double* x, const double* u,
                 const double* lam, double* dlam);

// Pointwise control from dH/du = 0, clamped to the channel bounds.
// Maximize-sense problems maximize H over u, minimize-sense minimize it;
// every built-in has a concave/convex H in u, so the stationary point
// (clamped) is the extremizer.  Throws for problems without a built-in
// characterization.
void characterize_control(const OcpProblem& p, const double* x, const double* lam, double* u);

// Forward-backward sweep: integrate the state forward under the current
// control, integrate the adjoint backward from lambda(T) = 0 (same RK4 on
// the reversed grid, states and controls linearly interpolated at stage
// times), characterize the control pointwise, relax
//     u <- relax * u_char + (1 - relax) * u_old,
// and stop when per-channel sum|u_new - u_old| <= tol * sum|u_new| or
// max_iter is hit (convergence flag false — the result is still returned).
// State/adjoint divergence throws IntegrationDiverged.
SweepResult fbs(const OcpProblem& p, const TimeGrid& g, double relax = 0.5, double tol = 1e-3,
                int max_iter = 500);

}  // namespace stepwise
