#pragma once

#include <vector>

#include "stepwise/core.hpp"
#include "stepwise/problems.hpp"
#include "stepwise/schedule.hpp"

namespace stepwise {

// Time grid plus state and control samples at every node.  Rows are stored
// flat (node-major) to keep cost evaluations allocation-free inside
// optimizer loops.
struct Trajectory {
    TimeGrid grid;
    int n_x = 0;
    int m = 0;
    std::vector<double> states;    // (step_count + 1) * n_x
    std::vector<double> controls;  // (step_count + 1) * m

    double* state(int k) { return states.data() + static_cast<std::size_t>(k) * n_x; }
    const double* state(int k) const { return states.data() + static_cast<std::size_t>(k) * n_x; }
    double* control(int k) { return controls.data() + static_cast<std::size_t>(k) * m; }
    const double* control(int k) const { return controls.data() + static_cast<std::size_t>(k) * m; }

    void resize(const TimeGrid& g, int n_x_, int m_) {
        grid = g;
        n_x = n_x_;
        m = m_;
        states.resize(static_cast<std::size_t>(g.nodes()) * n_x);
        controls.resize(static_cast<std::size_t>(g.nodes()) * m);
    }
};

// One classical 4th-order Runge-Kutta step; the control is evaluated at the
// exact stage times t, t + h/2, t + h.  Generic version for tests and small
// drivers; the integrator below uses a tuned allocation-free loop.
//
//   f(t, x, u, dx)   writes the dynamics RHS into dx
//   u_of_t(t) -> control vector
//
// Throws IntegrationDiverged if the update is non-finite.
template <class F, class U>
StateVec rk4_step(F&& f, double t, const StateVec& x, U&& u_of_t, double h) {
    const int n = static_cast<int>(x.size());
    StateVec k1(n), k2(n), k3(n), k4(n), tmp(n), out(n);
    const std::vector<double> u0 = u_of_t(t);
    const std::vector<double> um = u_of_t(t + h / 2);
    const std::vector<double> u1 = u_of_t(t + h);
    f(t, x.data(), u0.data(), k1.data());
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + h / 2 * k1[i];
    f(t + h / 2, tmp.data(), um.data(), k2.data());
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + h / 2 * k2[i];
    f(t + h / 2, tmp.data(), um.data(), k3.data());
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    f(t + h, tmp.data(), u1.data(), k4.data());
    for (int i = 0; i < n; ++i) out[i] = x[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    if (!all_finite(out.data(), n)) throw IntegrationDiverged(t + h, out);
    return out;
}

// Reusable scratch buffers for integrate_into.
struct OdeWorkspace {
    std::vector<double> k1, k2, k3, k4, xtmp, u0, um, u1;
    void resize(int n_x, int m) {
        k1.resize(n_x); k2.resize(n_x); k3.resize(n_x); k4.resize(n_x);
        xtmp.resize(n_x);
        u0.resize(m); um.resize(m); u1.resize(m);
    }
};

// Integrates the problem dynamics under the schedule across the grid.  State
// is continuous across schedule breakpoints by construction (each node's
// state seeds the next step); breakpoints need not coincide with grid nodes
// because the schedule is evaluated at exact stage times.
Trajectory integrate(const OcpProblem& p, const ControlSchedule& s, const TimeGrid& g);
void integrate_into(const OcpProblem& p, const ControlSchedule& s, const TimeGrid& g,
                    Trajectory& out, OdeWorkspace& ws);

// Composite trapezoid rule of the running cost over the trajectory's nodes.
double quadrature_running_cost(const OcpProblem& p, const Trajectory& traj);

// Schedule-aware variant: control jumps at breakpoints are not smeared across
// quadrature cells — every breakpoint inside (or at the edge of) a cell
// becomes an extra node, with the state linearly interpolated and the control
// taken one-sidedly on each sub-cell.
double quadrature_running_cost(const OcpProblem& p, const Trajectory& traj,
                               const ControlSchedule& s);

}  // namespace stepwise
