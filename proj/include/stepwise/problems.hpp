#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "stepwise/core.hpp"
#include "stepwise/schedule.hpp"

namespace stepwise {

enum class Sense { Minimize, Maximize };
enum class ProblemKind { Intro, Chemo, Dsdi, Custom };

class UnknownProblem : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnknownParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ChemoParams {
    double r = 0.1;      // tumor growth rate
    double a = 3.0;      // tumor-density weight in the running cost
    double b = 1.0;      // drug weight in the running cost
    double delta = 0.45; // dose magnitude
    double Nd = 0.0;     // desired tumor density
};

struct DsdiParams {
    double S0 = 1.0;   // inflow population scale
    double mu = 0.012; // natural death rate
    double p1 = 0.5, p2 = 0.5;         // susceptible inflow split
    double alpha1 = 0.05, alpha2 = 0.2;  // susceptibility factors
    double nu1 = 0.15, nu2 = 0.6;        // removal rates
    double beta1 = 0.2, beta2 = 0.06;    // transmission probabilities
    double r = 25.0;                     // contacts per unit time
    double q11 = 0.9, q12 = 0.1, q21 = 0.1, q22 = 0.9;  // infection routing
    double delta = 0.0;                  // disease-induced mortality
    double A = 3.0, B = 3.0;             // infection weights in the cost
    double C = 0.002, D = 0.002, E = 0.002, F = 0.002;  // control weights
};

// A control problem: dynamics RHS, running-cost integrand, horizon, initial
// state, per-channel control bounds, and optimization sense.  The built-in
// instances dispatch on `kind` so the integrator's inner loop stays inlined;
// `Custom` falls back to std::function members (used by tests).
struct OcpProblem {
    std::string name;
    ProblemKind kind = ProblemKind::Custom;
    int n_x = 1;
    int m = 1;
    double T = 1.0;
    StateVec x0;
    std::vector<double> u_lo, u_hi;
    Sense sense = Sense::Minimize;

    ChemoParams chemo;
    DsdiParams dsdi;

    std::function<void(double t, const double* x, const double* u, double* dx)> f_custom;
    std::function<double(double t, const double* x, const double* u)> L_custom;

    void f(double t, const double* x, const double* u, double* dx) const {
        switch (kind) {
            case ProblemKind::Intro:
                dx[0] = x[0] + u[0];
                return;
            case ProblemKind::Chemo: {
                // ln(1/N) blows up at N = 0; clamp keeps a diverging iterate
                // from turning into NaN costs before the divergence check.
                const double N = std::max(x[0], 1e-12);
                dx[0] = chemo.r * N * std::log(1.0 / N) - u[0] * chemo.delta * N;
                return;
            }
            case ProblemKind::Dsdi: {
                const auto& q = dsdi;
                const double S1 = x[0], S2 = x[1], I1 = x[2], I2 = x[3], R = x[4];
                const double prev = q.beta1 * I1 + q.beta2 * I2;
                const double lam1 = q.r * q.alpha1 * prev;  // force of infection, group 1
                const double lam2 = q.r * q.alpha2 * prev;
                const double in1 = lam1 * S1 * (1.0 - u[0]);
                const double in2 = lam2 * S2 * (1.0 - u[1]);
                dx[0] = q.mu * (q.p1 * q.S0 - S1) - in1;
                dx[1] = q.mu * (q.p2 * q.S0 - S2) - in2;
                dx[2] = q.q11 * in1 + q.q21 * in2 - (q.mu + q.nu1 + u[2]) * I1;
                dx[3] = q.q12 * in1 + q.q22 * in2 - (q.mu + q.nu2 + u[3]) * I2;
                dx[4] = (q.nu1 + u[2]) * I1 + (q.nu2 + u[3]) * I2 - (q.mu + q.delta) * R;
                return;
            }
            case ProblemKind::Custom:
                f_custom(t, x, u, dx);
                return;
        }
    }

    double L(double t, const double* x, const double* u) const {
        switch (kind) {
            case ProblemKind::Intro:
                return 2.0 * x[0] - 3.0 * u[0] - u[0] * u[0];
            case ProblemKind::Chemo: {
                const double d = x[0] - chemo.Nd;
                return chemo.a * d * d + chemo.b * u[0] * u[0];
            }
            case ProblemKind::Dsdi: {
                const auto& q = dsdi;
                return q.A * x[2] * x[2] + q.B * x[3] * x[3] + q.C * u[0] * u[0] +
                       q.D * u[1] * u[1] + q.E * u[2] * u[2] + q.F * u[3] * u[3];
            }
            case ProblemKind::Custom:
                return L_custom(t, x, u);
        }
        return 0.0;
    }
};

// Scalar objective of a schedule on a grid, both raw (in the problem's native
// sense) and as the quantity optimizers minimize.
struct CostReport {
    double raw = 0.0;        // J in the problem's native sense
    double minimized = 0.0;  // J for minimize-sense, 1/(1+J) for maximize-sense
    bool infeasible = false; // raw J <= -1 broke the max->min transform
    TimeGrid grid;
    ControlSchedule schedule;
};

// The max->min transform 1/(1+J) is strictly decreasing for J > -1, so it
// preserves the ordering of maximize-sense schedules.  J <= -1 yields a +inf
// sentinel so optimizer comparisons stay well-ordered.
inline double minimized_cost(Sense sense, double raw_j, bool* infeasible = nullptr) {
    if (sense == Sense::Minimize) return raw_j;
    if (raw_j <= -1.0) {
        if (infeasible) *infeasible = true;
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / (1.0 + raw_j);
}

// Built-in problem instances: "intro", "chemo", "dsdi".
std::vector<std::string> builtin_names();
OcpProblem builtin(const std::string& name);  // throws UnknownProblem listing valid names

// Named scalar parameters of a built-in, for overrides and listings.  Every
// published model constant (plus horizon, initial state, and control bounds)
// is individually overridable.
std::vector<std::pair<std::string, double>> parameters(const OcpProblem& p);
void apply_override(OcpProblem& p, const std::string& key,
                    double value);  // throws UnknownParameter

// Default integration grid per problem: h = 0.001 (intro), 0.01 (chemo),
// 0.1 (dsdi); the step count adapts if T was overridden.
TimeGrid default_grid(const OcpProblem& p);

// Integrates the schedule (module ode), applies quadrature with breakpoints
// inserted as extra nodes, and applies the sense transform.  Deterministic.
// Integration divergence propagates as IntegrationDiverged.
CostReport evaluate_cost(const OcpProblem& p, const ControlSchedule& s, const TimeGrid& g);

}  // namespace stepwise
