#include "stepwise/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepwise {

std::pair<double, double> intro_closed_form(double t) {
    const double e = std::exp(2.0 - t);
    const double lambda = 2.0 * (e - 1.0);
    const double u = std::clamp(e - 2.5, 0.0, 2.0);
    return {lambda, u};
}

void adjoint_rhs(const OcpProblem& p, double /*t*/, const double* x, const double* u,
                 const double* lam, double* dlam) {
    switch (p.kind) {
        case ProblemKind::Intro:
            // H = 2x - 3u - u^2 + lambda (x + u)  =>  lambda' = -(2 + lambda)
            dlam[0] = -(2.0 + lam[0]);
            return;
        case ProblemKind::Chemo: {
            // H = a(N-Nd)^2 + b u^2 + lambda (rN ln(1/N) - u delta N)
            // dH/dN = 2a(N-Nd) + lambda (r(ln(1/N) - 1) - u delta)
            const auto& c = p.chemo;
            const double N = std::max(x[0], 1e-12);
            dlam[0] = -(2.0 * c.a * (x[0] - c.Nd) +
                        lam[0] * (c.r * (std::log(1.0 / N) - 1.0) - u[0] * c.delta));
            return;
        }
        case ProblemKind::Dsdi: {
            const auto& q = p.dsdi;
            const double S1 = x[0], S2 = x[1], I1 = x[2], I2 = x[3];
            const double l1 = lam[0], l2 = lam[1], l3 = lam[2], l4 = lam[3], l5 = lam[4];
            const double w1 = 1.0 - u[0], w2 = 1.0 - u[1];
            const double prev = q.beta1 * I1 + q.beta2 * I2;
            const double lam1 = q.r * q.alpha1 * prev;  // force of infection
            const double lam2 = q.r * q.alpha2 * prev;
            // d(lam_i)/dI_j: the force of infection is linear in prevalence.
            const double d1b1 = q.r * q.alpha1 * q.beta1, d1b2 = q.r * q.alpha1 * q.beta2;
            const double d2b1 = q.r * q.alpha2 * q.beta1, d2b2 = q.r * q.alpha2 * q.beta2;

            const double dHdS1 =
                l1 * (-q.mu - lam1 * w1) + (l3 * q.q11 + l4 * q.q12) * lam1 * w1;
            const double dHdS2 =
                l2 * (-q.mu - lam2 * w2) + (l3 * q.q21 + l4 * q.q22) * lam2 * w2;
            const double dHdI1 = 2.0 * q.A * I1 - l1 * d1b1 * S1 * w1 - l2 * d2b1 * S2 * w2 +
                                 l3 * (d1b1 * q.q11 * S1 * w1 + d2b1 * q.q21 * S2 * w2 -
                                       (q.mu + q.nu1 + u[2])) +
                                 l4 * (d1b1 * q.q12 * S1 * w1 + d2b1 * q.q22 * S2 * w2) +
                                 l5 * (q.nu1 + u[2]);
            const double dHdI2 = 2.0 * q.B * I2 - l1 * d1b2 * S1 * w1 - l2 * d2b2 * S2 * w2 +
                                 l3 * (d1b2 * q.q11 * S1 * w1 + d2b2 * q.q21 * S2 * w2) +
                                 l4 * (d1b2 * q.q12 * S1 * w1 + d2b2 * q.q22 * S2 * w2 -
                                       (q.mu + q.nu2 + u[3])) +
                                 l5 * (q.nu2 + u[3]);
            const double dHdR = -l5 * (q.mu + q.delta);

            dlam[0] = -dHdS1;
            dlam[1] = -dHdS2;
            dlam[2] = -dHdI1;
            dlam[3] = -dHdI2;
            dlam[4] = -dHdR;
            return;
        }
        case ProblemKind::Custom:
            throw std::invalid_argument("adjoint_rhs: no adjoint system for custom problems");
    }
}

void characterize_control(const OcpProblem& p, const double* x, const double* lam, double* u) {
    switch (p.kind) {
        case ProblemKind::Intro:
            // dH/du = -2u - 3 + lambda = 0 (H concave in u, maximize)
            u[0] = std::clamp((lam[0] - 3.0) / 2.0, p.u_lo[0], p.u_hi[0]);
            return;
        case ProblemKind::Chemo:
            // dH/du = 2bu - lambda delta N = 0 (H convex in u, minimize)
            u[0] = std::clamp(p.chemo.delta * lam[0] * x[0] / (2.0 * p.chemo.b), p.u_lo[0],
                              p.u_hi[0]);
            return;
        case ProblemKind::Dsdi: {
            const auto& q = p.dsdi;
            const double S1 = x[0], S2 = x[1], I1 = x[2], I2 = x[3];
            const double l1 = lam[0], l2 = lam[1], l3 = lam[2], l4 = lam[3], l5 = lam[4];
            const double prev = q.beta1 * I1 + q.beta2 * I2;
            const double lam1 = q.r * q.alpha1 * prev;
            const double lam2 = q.r * q.alpha2 * prev;
            u[0] = std::clamp(lam1 * S1 * (q.q11 * l3 + q.q12 * l4 - l1) / (2.0 * q.C), p.u_lo[0],
                              p.u_hi[0]);
            u[1] = std::clamp(lam2 * S2 * (q.q21 * l3 + q.q22 * l4 - l2) / (2.0 * q.D), p.u_lo[1],
                              p.u_hi[1]);
            u[2] = std::clamp(I1 * (l3 - l5) / (2.0 * q.E), p.u_lo[2], p.u_hi[2]);
            u[3] = std::clamp(I2 * (l4 - l5) / (2.0 * q.F), p.u_lo[3], p.u_hi[3]);
            return;
        }
        case ProblemKind::Custom:
            throw std::invalid_argument(
                "characterize_control: no characterization for custom problems");
    }
}

namespace {

// Forward state pass under node-sampled controls (linear interpolation at the
// half step).  Throws IntegrationDiverged on non-finite states.
void forward_pass(const OcpProblem& p, const TimeGrid& g, const std::vector<double>& u,
                  std::vector<double>& X) {
    const int K = g.step_count, n = p.n_x, m = p.m;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), xt(n), um(m);
    for (int i = 0; i < n; ++i) X[i] = p.x0[i];
    for (int k = 0; k < K; ++k) {
        const double t = g.node(k), t1 = g.node(k + 1);
        const double h = t1 - t, tm = t + 0.5 * h;
        const double* xk = &X[static_cast<std::size_t>(k) * n];
        const double* u0 = &u[static_cast<std::size_t>(k) * m];
        const double* u1 = &u[static_cast<std::size_t>(k + 1) * m];
        for (int c = 0; c < m; ++c) um[c] = 0.5 * (u0[c] + u1[c]);

        p.f(t, xk, u0, k1.data());
        for (int i = 0; i < n; ++i) xt[i] = xk[i] + 0.5 * h * k1[i];
        p.f(tm, xt.data(), um.data(), k2.data());
        for (int i = 0; i < n; ++i) xt[i] = xk[i] + 0.5 * h * k2[i];
        p.f(tm, xt.data(), um.data(), k3.data());
        for (int i = 0; i < n; ++i) xt[i] = xk[i] + h * k3[i];
        p.f(t1, xt.data(), u1, k4.data());

        double* xn = &X[static_cast<std::size_t>(k + 1) * n];
        for (int i = 0; i < n; ++i)
            xn[i] = xk[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        if (!all_finite(xn, n)) throw IntegrationDiverged(t1, StateVec(xn, xn + n));
    }
}

// Backward adjoint pass from lambda(T) = 0; stage states/controls are linear
// interpolations of the stored node values.
void backward_pass(const OcpProblem& p, const TimeGrid& g, const std::vector<double>& u,
                   const std::vector<double>& X, std::vector<double>& LAM) {
    const int K = g.step_count, n = p.n_x, m = p.m;
    std::vector<double> l1(n), l2(n), l3(n), l4(n), lt(n), xm(n), um(m);
    for (int i = 0; i < n; ++i) LAM[static_cast<std::size_t>(K) * n + i] = 0.0;
    for (int k = K; k > 0; --k) {
        const double t = g.node(k), t0 = g.node(k - 1);
        const double h = t - t0, tm = t0 + 0.5 * h;
        const double* xk = &X[static_cast<std::size_t>(k) * n];
        const double* xp = &X[static_cast<std::size_t>(k - 1) * n];
        const double* uk = &u[static_cast<std::size_t>(k) * m];
        const double* up = &u[static_cast<std::size_t>(k - 1) * m];
        const double* lk = &LAM[static_cast<std::size_t>(k) * n];
        for (int i = 0; i < n; ++i) xm[i] = 0.5 * (xk[i] + xp[i]);
        for (int c = 0; c < m; ++c) um[c] = 0.5 * (uk[c] + up[c]);

        adjoint_rhs(p, t, xk, uk, lk, l1.data());
        for (int i = 0; i < n; ++i) lt[i] = lk[i] - 0.5 * h * l1[i];
        adjoint_rhs(p, tm, xm.data(), um.data(), lt.data(), l2.data());
        for (int i = 0; i < n; ++i) lt[i] = lk[i] - 0.5 * h * l2[i];
        adjoint_rhs(p, tm, xm.data(), um.data(), lt.data(), l3.data());
        for (int i = 0; i < n; ++i) lt[i] = lk[i] - h * l3[i];
        adjoint_rhs(p, t0, xp, up, lt.data(), l4.data());

        double* ln = &LAM[static_cast<std::size_t>(k - 1) * n];
        for (int i = 0; i < n; ++i)
            ln[i] = lk[i] - h / 6.0 * (l1[i] + 2.0 * (l2[i] + l3[i]) + l4[i]);
        if (!all_finite(ln, n)) throw IntegrationDiverged(t0, StateVec(ln, ln + n));
    }
}

double node_trapezoid_cost(const OcpProblem& p, const TimeGrid& g, const std::vector<double>& X,
                           const std::vector<double>& u) {
    const int K = g.step_count;
    double J = 0.0;
    double prev = p.L(g.node(0), X.data(), u.data());
    for (int k = 1; k <= K; ++k) {
        const double cur = p.L(g.node(k), &X[static_cast<std::size_t>(k) * p.n_x],
                               &u[static_cast<std::size_t>(k) * p.m]);
        J += 0.5 * (g.node(k) - g.node(k - 1)) * (prev + cur);
        prev = cur;
    }
    return J;
}

}  // namespace

SweepResult fbs(const OcpProblem& p, const TimeGrid& g, double relax, double tol, int max_iter) {
    if (!(relax > 0.0 && relax <= 1.0)) throw std::invalid_argument("fbs: need 0 < relax <= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("fbs: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("fbs: max_iter must be >= 1");
    {
        const double span_tol = 1e-9 * std::max(1.0, std::abs(p.T));
        if (std::abs(g.t0) > span_tol || std::abs(g.t_end - p.T) > span_tol)
            throw std::invalid_argument("fbs: grid must span [0, T] of the problem");
    }
    const int K = g.step_count, n = p.n_x, m = p.m;
    const std::size_t nodes = static_cast<std::size_t>(K) + 1;

    SweepResult res;
    res.grid = g;
    res.n_x = n;
    res.m = m;
    res.states.assign(nodes * n, 0.0);
    res.adjoints.assign(nodes * n, 0.0);
    res.controls.assign(nodes * m, 0.0);  // sweep starts from u = 0

    std::vector<double> u_new(nodes * m), u_char(m);
    bool converged = false;
    int it = 0;
    while (it < max_iter && !converged) {
        ++it;
        forward_pass(p, g, res.controls, res.states);
        backward_pass(p, g, res.controls, res.states, res.adjoints);

        for (std::size_t k = 0; k < nodes; ++k) {
            characterize_control(p, &res.states[k * n], &res.adjoints[k * n], u_char.data());
            for (int c = 0; c < m; ++c)
                u_new[k * m + c] = relax * u_char[c] + (1.0 - relax) * res.controls[k * m + c];
        }

        converged = true;
        for (int c = 0; c < m && converged; ++c) {
            double diff = 0.0, mag = 0.0;
            for (std::size_t k = 0; k < nodes; ++k) {
                diff += std::abs(u_new[k * m + c] - res.controls[k * m + c]);
                mag += std::abs(u_new[k * m + c]);
            }
            if (diff > tol * mag) converged = false;
        }
        res.controls.swap(u_new);
    }

    // Final state pass so the reported cost/states match the final control.
    forward_pass(p, g, res.controls, res.states);
    backward_pass(p, g, res.controls, res.states, res.adjoints);
    res.raw_cost = node_trapezoid_cost(p, g, res.states, res.controls);
    res.minimized_cost = minimized_cost(p.sense, res.raw_cost);
    res.iterations = it;
    res.converged = converged;
    return res;
}

}  // namespace stepwise
