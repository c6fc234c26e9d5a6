#include "stepwise/ode.hpp"

#include <cmath>
#include <cstring>

namespace stepwise {

namespace {

void check_grid_matches(const OcpProblem& p, const TimeGrid& g) {
    const double tol = 1e-9 * std::max(1.0, std::abs(p.T));
    if (std::abs(g.t0) > tol || std::abs(g.t_end - p.T) > tol)
        throw std::invalid_argument("integration grid must span [0, T] of the problem");
}

}  // namespace

void integrate_into(const OcpProblem& p, const ControlSchedule& s, const TimeGrid& g,
                    Trajectory& out, OdeWorkspace& ws) {
    check_grid_matches(p, g);
    const int n = p.n_x, m = p.m;
    out.resize(g, n, m);
    ws.resize(n, m);
    ScheduleCursor cursor(s);

    double* x = out.state(0);
    for (int i = 0; i < n; ++i) x[i] = p.x0[i];

    double* k1 = ws.k1.data();
    double* k2 = ws.k2.data();
    double* k3 = ws.k3.data();
    double* k4 = ws.k4.data();
    double* xt = ws.xtmp.data();

    for (int k = 0; k < g.step_count; ++k) {
        const double t = g.node(k);
        const double t1 = g.node(k + 1);
        const double h = t1 - t;
        const double tm = t + 0.5 * h;

        double* uk = out.control(k);
        cursor.eval(t, uk);          // stored node control = right-continuous value
        cursor.eval(tm, ws.um.data());
        // End stage takes the left limit: a step that closes exactly on a
        // control jump must integrate with the value that held on its
        // interior, not the one that starts afterwards.
        cursor.eval_left(t1, ws.u1.data());

        const double* xk = out.state(k);
        p.f(t, xk, uk, k1);
        for (int i = 0; i < n; ++i) xt[i] = xk[i] + 0.5 * h * k1[i];
        p.f(tm, xt, ws.um.data(), k2);
        for (int i = 0; i < n; ++i) xt[i] = xk[i] + 0.5 * h * k2[i];
        p.f(tm, xt, ws.um.data(), k3);
        for (int i = 0; i < n; ++i) xt[i] = xk[i] + h * k3[i];
        p.f(t1, xt, ws.u1.data(), k4);

        double* xn = out.state(k + 1);
        for (int i = 0; i < n; ++i)
            xn[i] = xk[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        if (!all_finite(xn, n)) throw IntegrationDiverged(t1, StateVec(xn, xn + n));
    }
    cursor.eval(g.t_end, out.control(g.step_count));
}

Trajectory integrate(const OcpProblem& p, const ControlSchedule& s, const TimeGrid& g) {
    Trajectory traj;
    OdeWorkspace ws;
    integrate_into(p, s, g, traj, ws);
    return traj;
}

double quadrature_running_cost(const OcpProblem& p, const Trajectory& traj) {
    const int K = traj.grid.step_count;
    double J = 0.0;
    double prev = p.L(traj.grid.node(0), traj.state(0), traj.control(0));
    for (int k = 0; k < K; ++k) {
        const double cur = p.L(traj.grid.node(k + 1), traj.state(k + 1), traj.control(k + 1));
        J += 0.5 * (traj.grid.node(k + 1) - traj.grid.node(k)) * (prev + cur);
        prev = cur;
    }
    return J;
}

double quadrature_running_cost(const OcpProblem& p, const Trajectory& traj,
                               const ControlSchedule& s) {
    const int K = traj.grid.step_count;
    const int n = traj.n_x;
    const auto& bp = s.breakpoints;
    const int nseg = s.segments();

    std::vector<double> xi(n);
    double J = 0.0;
    int seg = 0;
    for (int k = 0; k < K; ++k) {
        const double ta = traj.grid.node(k);
        const double tb = traj.grid.node(k + 1);
        while (seg + 1 < nseg && bp[seg + 1] <= ta) ++seg;

        double pa = ta;
        double La = p.L(ta, traj.state(k), s.value(seg));
        // Split the cell at every breakpoint strictly inside it; the control
        // is one-sided on each sub-cell so jumps stay sharp.
        while (seg + 1 < nseg && bp[seg + 1] < tb) {
            const double pb = bp[seg + 1];
            // Linear state interpolation at the split point.
            const double w = (pb - ta) / (tb - ta);
            const double* xa = traj.state(k);
            const double* xb = traj.state(k + 1);
            for (int i = 0; i < n; ++i) xi[i] = (1.0 - w) * xa[i] + w * xb[i];

            J += 0.5 * (pb - pa) * (La + p.L(pb, xi.data(), s.value(seg)));
            while (seg + 1 < nseg && bp[seg + 1] <= pb) ++seg;  // skip zero-width runs
            La = p.L(pb, xi.data(), s.value(seg));
            pa = pb;
        }
        const double Lb = p.L(tb, traj.state(k + 1), s.value(seg));
        J += 0.5 * (tb - pa) * (La + Lb);
    }
    return J;
}

}  // namespace stepwise
