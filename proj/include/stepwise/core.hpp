#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace stepwise {

using StateVec = std::vector<double>;

// Uniform node grid over [t0, t_end]. The last node is pinned to t_end so the
// final step absorbs any floating-point rounding in h.
struct TimeGrid {
    double t0 = 0.0;
    double t_end = 1.0;
    int step_count = 1;

    TimeGrid() = default;
    TimeGrid(double t0_, double t_end_, int steps) : t0(t0_), t_end(t_end_), step_count(steps) {
        if (!(t_end > t0) || step_count < 1)
            throw std::invalid_argument("TimeGrid: need t_end > t0 and step_count >= 1");
    }

    double h() const { return (t_end - t0) / step_count; }
    double node(int k) const { return k == step_count ? t_end : t0 + k * h(); }
    int nodes() const { return step_count + 1; }
};

// Thrown when the state leaves the representable range (NaN/Inf) mid-integration.
class IntegrationDiverged : public std::runtime_error {
public:
    IntegrationDiverged(double t, StateVec state)
        : std::runtime_error("integration diverged at t = " + std::to_string(t)),
          t_(t),
          state_(std::move(state)) {}

    double where() const { return t_; }
    const StateVec& state() const { return state_; }

private:
    double t_;
    StateVec state_;
};

inline bool all_finite(const double* x, int n) {
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

}  // namespace stepwise
