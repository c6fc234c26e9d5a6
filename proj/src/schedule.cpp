#include "stepwise/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stepwise {

void ControlSchedule::validate() const {
    const int n = segments();
    if (n < 1) throw std::invalid_argument("schedule needs at least one segment");
    if (m < 1) throw std::invalid_argument("schedule needs at least one channel");
    if (values.size() != static_cast<std::size_t>(n) * m)
        throw std::invalid_argument("schedule values size mismatch");
    if (breakpoints.front() != 0.0 || breakpoints.back() != T)
        throw std::invalid_argument("schedule breakpoints must start at 0 and end at T");
    for (int k = 0; k < n; ++k)
        if (breakpoints[k + 1] < breakpoints[k])
            throw std::invalid_argument("schedule breakpoints must be non-decreasing");
    if (lo.size() != static_cast<std::size_t>(m) || hi.size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("schedule bounds size mismatch");
    for (int k = 0; k < n; ++k)
        for (int c = 0; c < m; ++c) {
            const double v = value(k)[c];
            if (v < lo[c] || v > hi[c])
                throw std::invalid_argument("schedule value outside channel bounds");
        }
}

int ControlSchedule::segment_at(double t) const {
    // upper_bound finds the first breakpoint > t; the segment starting at the
    // previous breakpoint owns t.  Duplicate breakpoints (zero-width segments)
    // are skipped automatically because their upper edge equals t.
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    int idx = static_cast<int>(it - breakpoints.begin()) - 1;
    return std::min(std::max(idx, 0), segments() - 1);
}

void eval_schedule(const ControlSchedule& s, double t, double* out) {
    if (t < 0.0 || t > s.T) throw std::domain_error("eval_schedule: t outside [0, T]");
    const double* v = s.value(s.segment_at(t));
    for (int c = 0; c < s.m; ++c) out[c] = v[c];
}

std::vector<double> eval_schedule(const ControlSchedule& s, double t) {
    std::vector<double> out(s.m);
    eval_schedule(s, t, out.data());
    return out;
}

int decision_size(GridKind kind, int n, int m) {
    return kind == GridKind::Fixed ? n * m : n + n * m;
}

std::vector<double> encode(const ControlSchedule& s, GridKind kind) {
    std::vector<double> v;
    if (kind == GridKind::Variable) {
        // Widths are already normalized increments (they sum to T).
        for (int k = 0; k < s.segments(); ++k)
            v.push_back(s.breakpoints[k + 1] - s.breakpoints[k]);
    }
    v.insert(v.end(), s.values.begin(), s.values.end());
    return v;
}

ControlSchedule decode(const std::vector<double>& v, GridKind kind, int n, int m, double T,
                       const std::vector<double>& lo, const std::vector<double>& hi) {
    if (n < 1 || m < 1) throw std::invalid_argument("decode: need n >= 1 and m >= 1");
    const std::size_t want = static_cast<std::size_t>(decision_size(kind, n, m));
    if (v.size() != want)
        throw LayoutError("decode: decision vector has " + std::to_string(v.size()) +
                          " entries, layout needs " + std::to_string(want));

    ControlSchedule s;
    s.T = T;
    s.m = m;
    s.lo = lo;
    s.hi = hi;
    s.breakpoints.resize(n + 1);
    s.breakpoints[0] = 0.0;

    std::size_t at = 0;
    if (kind == GridKind::Fixed) {
        for (int k = 1; k < n; ++k) s.breakpoints[k] = T * k / n;
    } else {
        double total = 0.0;
        for (int k = 0; k < n; ++k) {
            const double w = v[at + k];
            if (!(w >= 0.0)) throw std::invalid_argument("decode: negative width increment");
            total += w;
        }
        if (total > 0.0) {
            double acc = 0.0;
            for (int k = 1; k < n; ++k) {
                acc += v[at + k - 1];
                s.breakpoints[k] = T * (acc / total);
            }
        } else {
            for (int k = 1; k < n; ++k) s.breakpoints[k] = T * k / n;  // equal-width fallback
        }
        at += n;
    }
    s.breakpoints[n] = T;

    s.values.resize(static_cast<std::size_t>(n) * m);
    for (int k = 0; k < n; ++k)
        for (int c = 0; c < m; ++c) {
            const double raw = v[at + static_cast<std::size_t>(k) * m + c];
            s.values[static_cast<std::size_t>(k) * m + c] = std::clamp(raw, lo[c], hi[c]);
        }
    return s;
}

ControlSchedule refine(const ControlSchedule& s, int factor) {
    if (factor < 1) throw std::invalid_argument("refine: factor must be >= 1");
    if (factor == 1) return s;
    ControlSchedule r;
    r.T = s.T;
    r.m = s.m;
    r.lo = s.lo;
    r.hi = s.hi;
    const int n = s.segments();
    r.breakpoints.reserve(static_cast<std::size_t>(n) * factor + 1);
    r.values.reserve(static_cast<std::size_t>(n) * factor * s.m);
    r.breakpoints.push_back(0.0);
    for (int k = 0; k < n; ++k) {
        const double a = s.breakpoints[k], b = s.breakpoints[k + 1];
        for (int j = 1; j <= factor; ++j) {
            r.breakpoints.push_back(j == factor ? b : a + (b - a) * j / factor);
            r.values.insert(r.values.end(), s.value(k), s.value(k) + s.m);
        }
    }
    r.breakpoints.back() = s.T;
    return r;
}

ControlSchedule sample_continuous(const std::function<std::vector<double>(double)>& u, int n,
                                  double T, const std::vector<double>& lo,
                                  const std::vector<double>& hi) {
    if (n < 1) throw std::invalid_argument("sample_continuous: need n >= 1");
    ControlSchedule s;
    s.T = T;
    s.m = static_cast<int>(lo.size());
    s.lo = lo;
    s.hi = hi;
    s.breakpoints.resize(n + 1);
    for (int k = 0; k <= n; ++k) s.breakpoints[k] = k == n ? T : T * k / n;
    s.values.reserve(static_cast<std::size_t>(n) * s.m);
    for (int k = 0; k < n; ++k) {
        const double mid = T * (k + 0.5) / n;
        const std::vector<double> uk = u(mid);
        for (int c = 0; c < s.m; ++c)
            s.values.push_back(std::clamp(uk[c], lo[c], hi[c]));
    }
    return s;
}

}  // namespace stepwise
