#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace stepwise {

enum class GridKind { Fixed, Variable };

// Raised when a decision vector's length does not match the declared layout.
class LayoutError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Piecewise-constant control law over [0, T] for m channels.
//
// breakpoints:  0 = b_0 <= b_1 <= ... <= b_n = T  (n+1 entries, zero-width
//               segments are legal and contribute nothing to cost)
// values:       n x m, row-major (segment-major)
// lo/hi:        per-channel bounds every value must respect
//
// Evaluation is right-continuous: t belongs to the segment [b_k, b_{k+1})
// that contains it, and t = T yields the last segment's value.
struct ControlSchedule {
    double T = 1.0;
    int m = 1;
    std::vector<double> breakpoints;
    std::vector<double> values;
    std::vector<double> lo, hi;

    int segments() const { return static_cast<int>(breakpoints.size()) - 1; }
    double* value(int seg) { return values.data() + static_cast<std::size_t>(seg) * m; }
    const double* value(int seg) const { return values.data() + static_cast<std::size_t>(seg) * m; }

    // Throws std::invalid_argument if any structural invariant is broken.
    void validate() const;

    // Index of the segment owning time t (right-continuous, zero-width
    // segments skipped; t = T maps to the last segment).
    int segment_at(double t) const;
};

// eval_schedule: the value of s at time t.  Throws std::domain_error for
// t outside [0, T].
void eval_schedule(const ControlSchedule& s, double t, double* out);
std::vector<double> eval_schedule(const ControlSchedule& s, double t);

// Monotone-time evaluator used inside integration loops: amortizes the
// segment lookup to O(1) per call when queries never move backwards.
class ScheduleCursor {
public:
    explicit ScheduleCursor(const ControlSchedule& s) : s_(&s) {}

    void eval(double t, double* out) {
        const int n = s_->segments();
        while (seg_ + 1 < n && t >= s_->breakpoints[seg_ + 1]) ++seg_;
        const double* v = s_->value(seg_);
        for (int c = 0; c < s_->m; ++c) out[c] = v[c];
    }

    // Left limit: at a breakpoint this returns the value of the segment that
    // ends there, so an integration step closing exactly on a jump samples
    // the control that governed the step's interior.
    void eval_left(double t, double* out) {
        const int n = s_->segments();
        while (seg_ + 1 < n && t > s_->breakpoints[seg_ + 1]) ++seg_;
        const double* v = s_->value(seg_);
        for (int c = 0; c < s_->m; ++c) out[c] = v[c];
    }

    void reset() { seg_ = 0; }

private:
    const ControlSchedule* s_;
    int seg_ = 0;
};

// Flat optimizer-facing encoding of a schedule.
//
//   fixed:     the n*m segment values (equal-width grid implied)
//   variable:  n nonnegative width increments followed by the n*m values
//
// Variable-grid increments w are normalized, b_k = T * (sum_{j<=k} w_j) /
// (sum_j w_j), so any nonnegative vector is feasible and optimizers need no
// ordering repair.  All-zero increments fall back to equal widths.
std::vector<double> encode(const ControlSchedule& s, GridKind kind);
ControlSchedule decode(const std::vector<double>& v, GridKind kind, int n, int m, double T,
                       const std::vector<double>& lo, const std::vector<double>& hi);

// Number of decision variables for the given layout.
int decision_size(GridKind kind, int n, int m);

// Splits every segment into `factor` equal sub-segments with the same value;
// pointwise evaluation is unchanged.
ControlSchedule refine(const ControlSchedule& s, int factor);

// n equal segments, each holding u sampled at the segment midpoint.
ControlSchedule sample_continuous(const std::function<std::vector<double>(double)>& u, int n,
                                  double T, const std::vector<double>& lo,
                                  const std::vector<double>& hi);

}  // namespace stepwise
