#include "stepwise/problems.hpp"

#include <algorithm>
#include <cmath>

#include "stepwise/ode.hpp"

namespace stepwise {

std::vector<std::string> builtin_names() { return {"intro", "chemo", "dsdi"}; }

OcpProblem builtin(const std::string& name) {
    OcpProblem p;
    p.name = name;
    if (name == "intro") {
        // max J = int_0^2 (2x - 3u - u^2) dt,  x' = x + u,  x(0) = 5,  u in [0,2]
        p.kind = ProblemKind::Intro;
        p.n_x = 1;
        p.m = 1;
        p.T = 2.0;
        p.x0 = {5.0};
        p.u_lo = {0.0};
        p.u_hi = {2.0};
        p.sense = Sense::Maximize;
    } else if (name == "chemo") {
        // min int_0^20 (a(N - Nd)^2 + b u^2) dt,  N' = rN ln(1/N) - u delta N
        p.kind = ProblemKind::Chemo;
        p.n_x = 1;
        p.m = 1;
        p.T = 20.0;
        p.x0 = {0.975};
        p.u_lo = {0.0};
        // The model only demands u >= 0; the optimizers need a finite box.
        // 10 sits comfortably above the control scale implied by the
        // characterization u = delta*lambda*N/(2b).  Override via "u_max".
        p.u_hi = {10.0};
        p.sense = Sense::Minimize;
    } else if (name == "dsdi") {
        // Two-group differential susceptibility / differential infectivity
        // epidemic with prevention (u1, u2) and treatment (u3, u4) controls.
        p.kind = ProblemKind::Dsdi;
        p.n_x = 5;
        p.m = 4;
        p.T = 1000.0;
        p.x0 = {0.47, 0.47, 0.02, 0.04, 0.0};  // S1, S2, I1, I2, R
        p.u_lo = {0.0, 0.0, 0.0, 0.0};
        p.u_hi = {1.0, 1.0, 1.0, 1.0};
        p.sense = Sense::Minimize;
    } else {
        std::string msg = "unknown problem '" + name + "'; valid names:";
        for (const auto& n : builtin_names()) msg += " " + n;
        throw UnknownProblem(msg);
    }
    return p;
}

namespace {

// Named scalar slots of each built-in; keeps parameters(), apply_override()
// and the CLI listing in lock-step.
std::vector<std::pair<std::string, double*>> parameter_slots(OcpProblem& p) {
    switch (p.kind) {
        case ProblemKind::Intro:
            return {{"T", &p.T}, {"x0", &p.x0[0]}, {"u_min", &p.u_lo[0]}, {"u_max", &p.u_hi[0]}};
        case ProblemKind::Chemo:
            return {{"r", &p.chemo.r},   {"a", &p.chemo.a},   {"b", &p.chemo.b},
                    {"delta", &p.chemo.delta}, {"Nd", &p.chemo.Nd}, {"N0", &p.x0[0]},
                    {"T", &p.T},         {"u_max", &p.u_hi[0]}};
        case ProblemKind::Dsdi: {
            auto& q = p.dsdi;
            return {{"S0", &q.S0},       {"mu", &q.mu},       {"T", &p.T},
                    {"p1", &q.p1},       {"p2", &q.p2},       {"alpha1", &q.alpha1},
                    {"alpha2", &q.alpha2}, {"nu1", &q.nu1},   {"nu2", &q.nu2},
                    {"beta1", &q.beta1}, {"beta2", &q.beta2}, {"r", &q.r},
                    {"q11", &q.q11},     {"q12", &q.q12},     {"q21", &q.q21},
                    {"q22", &q.q22},     {"delta", &q.delta}, {"A", &q.A},
                    {"B", &q.B},         {"C", &q.C},         {"D", &q.D},
                    {"E", &q.E},         {"F", &q.F},         {"S1_0", &p.x0[0]},
                    {"S2_0", &p.x0[1]},  {"I1_0", &p.x0[2]},  {"I2_0", &p.x0[3]},
                    {"R_0", &p.x0[4]}};
        }
        case ProblemKind::Custom:
            return {};
    }
    return {};
}

}  // namespace

std::vector<std::pair<std::string, double>> parameters(const OcpProblem& p) {
    auto& mut = const_cast<OcpProblem&>(p);  // slots are read here, never written
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [key, ptr] : parameter_slots(mut)) out.emplace_back(key, *ptr);
    return out;
}

void apply_override(OcpProblem& p, const std::string& key, double value) {
    for (auto& [name, ptr] : parameter_slots(p)) {
        if (name == key) {
            *ptr = value;
            return;
        }
    }
    std::string msg = "unknown parameter '" + key + "' for problem '" + p.name + "'; known keys:";
    for (const auto& [name, ptr] : parameter_slots(p)) msg += " " + name;
    throw UnknownParameter(msg);
}

TimeGrid default_grid(const OcpProblem& p) {
    double h = 0.01;
    switch (p.kind) {
        case ProblemKind::Intro: h = 0.001; break;
        case ProblemKind::Chemo: h = 0.01; break;
        case ProblemKind::Dsdi: h = 0.1; break;
        case ProblemKind::Custom: h = p.T / 1000.0; break;
    }
    const int steps = std::max(1, static_cast<int>(std::lround(p.T / h)));
    return TimeGrid(0.0, p.T, steps);
}

CostReport evaluate_cost(const OcpProblem& p, const ControlSchedule& s, const TimeGrid& g) {
    CostReport report;
    report.grid = g;
    report.schedule = s;
    const Trajectory traj = integrate(p, s, g);
    report.raw = quadrature_running_cost(p, traj, s);
    report.minimized = minimized_cost(p.sense, report.raw, &report.infeasible);
    return report;
}

}  // namespace stepwise
