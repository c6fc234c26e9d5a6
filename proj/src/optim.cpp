#include "stepwise/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stepwise {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_box(const OptimizerConfig& c) {
    if (c.lo.size() != c.hi.size() || c.lo.empty())
        throw std::invalid_argument("optimizer box bounds must be non-empty and equal-sized");
    for (std::size_t i = 0; i < c.lo.size(); ++i)
        if (!(c.lo[i] <= c.hi[i])) throw std::invalid_argument("optimizer box has lo > hi");
    if (c.budget < 1) throw std::invalid_argument("optimizer budget must be >= 1");
}

std::vector<double> start_point(const OptimizerConfig& c, Rng& rng) {
    if (c.start) {
        if (c.start->size() != c.lo.size())
            throw std::invalid_argument("start point dimension mismatch");
        return *c.start;
    }
    std::vector<double> x(c.lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(c.lo[i], c.hi[i]);
    return x;
}

// Reflect a proposal into [lo, hi] (fold at the violated face until inside).
double reflect(double x, double lo, double hi) {
    if (lo == hi) return lo;
    const double width = hi - lo;
    while (x < lo || x > hi) {
        if (x < lo) x = lo + (lo - x);
        if (x > hi) x = hi - (x - hi);
        // A proposal many widths away folds in a finite number of steps; the
        // loop is guaranteed to terminate because each fold shrinks the
        // overshoot modulo 2*width.
        if (!std::isfinite(x)) return lo + 0.5 * width;
    }
    return x;
}

struct TraceRecorder {
    int stride = 0;
    std::vector<std::pair<long, double>>* out = nullptr;
    void record(long evals, double best) {
        if (out && stride > 0 && evals % stride == 0) out->emplace_back(evals, best);
    }
};

}  // namespace

Method method_from_string(const std::string& s) {
    if (s == "ps" || s == "pattern-search") return Method::PatternSearch;
    if (s == "sa" || s == "simulated-annealing") return Method::SimulatedAnnealing;
    if (s == "ga" || s == "genetic") return Method::Genetic;
    throw std::invalid_argument("unknown optimizer '" + s + "'; valid: ps, sa, ga");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::PatternSearch: return "ps";
        case Method::SimulatedAnnealing: return "sa";
        case Method::Genetic: return "ga";
    }
    return "?";
}

OptimizerRun pattern_search(const Objective& objective, const OptimizerConfig& config) {
    check_box(config);
    const auto t0 = Clock::now();
    const int dim = static_cast<int>(config.lo.size());

    OptimizerRun run;
    run.seed = config.seed;
    TraceRecorder trace{config.trace_stride, config.trace_stride ? &run.trace : nullptr};

    // The start point is the only random ingredient; the polling itself is
    // deterministic (first improving coordinate in fixed index order).
    Rng rng(config.seed);
    std::vector<double> x = start_point(config, rng);
    for (int i = 0; i < dim; ++i) x[i] = std::clamp(x[i], config.lo[i], config.hi[i]);

    double fx = objective(x);
    long evals = 1;
    trace.record(evals, fx);

    std::vector<double> delta(dim);
    for (int i = 0; i < dim; ++i) delta[i] = config.ps_delta0_frac * (config.hi[i] - config.lo[i]);

    std::vector<double> cand = x;
    // Outer loop: iterated compass search.  When the mesh collapses below
    // the tolerance with budget remaining, re-expand it around the incumbent
    // and continue -- coarse polls were last tried at older incumbents, so a
    // fresh sweep from the current point can still find descent.  Stop once
    // a full collapse cycle yields no improvement (deterministic fixed
    // point: repeating it would replay the same polls).
    while (evals < config.budget) {
        const double fx_at_cycle_start = fx;
        while (evals < config.budget) {
            if (*std::max_element(delta.begin(), delta.end()) < config.ps_delta_tol) break;
            bool improved = false;
            for (int i = 0; i < dim && evals < config.budget; ++i) {
                for (const double sign : {+1.0, -1.0}) {
                    if (evals >= config.budget) break;
                    cand = x;
                    cand[i] = std::clamp(x[i] + sign * delta[i], config.lo[i], config.hi[i]);
                    if (cand[i] == x[i]) continue;  // clamped onto the incumbent
                    const double fc = objective(cand);
                    ++evals;
                    if (fc < fx) {
                        x = cand;
                        fx = fc;
                        improved = true;
                        trace.record(evals, fx);
                        break;  // opportunistic: accept the first improving poll
                    }
                    trace.record(evals, fx);
                }
                if (improved) break;
            }
            if (!improved)
                for (double& d : delta) d *= 0.5;
        }
        if (fx >= fx_at_cycle_start) break;  // converged and no progress this cycle
        for (int i = 0; i < dim; ++i)
            delta[i] = config.ps_delta0_frac * (config.hi[i] - config.lo[i]);
    }

    run.best_x = std::move(x);
    run.best_cost = fx;
    run.evals = evals;
    run.budget_exhausted = evals >= config.budget;
    run.wall_seconds = seconds_since(t0);
    return run;
}

OptimizerRun simulated_annealing(const Objective& objective, const OptimizerConfig& config) {
    check_box(config);
    const auto t0 = Clock::now();
    const int dim = static_cast<int>(config.lo.size());

    OptimizerRun run;
    run.seed = config.seed;
    TraceRecorder trace{config.trace_stride, config.trace_stride ? &run.trace : nullptr};

    Rng rng(config.seed);
    std::vector<double> x = start_point(config, rng);
    for (int i = 0; i < dim; ++i) x[i] = std::clamp(x[i], config.lo[i], config.hi[i]);
    double fx = objective(x);
    long evals = 1;

    std::vector<double> best_x = x;
    double best = fx;

    std::vector<double> sigma0(dim);
    for (int i = 0; i < dim; ++i) sigma0[i] = config.sa_sigma0_frac * (config.hi[i] - config.lo[i]);

    auto propose = [&](const std::vector<double>& from, double scale, std::vector<double>& out) {
        for (int i = 0; i < dim; ++i)
            out[i] = reflect(from[i] + scale * sigma0[i] * rng.normal(), config.lo[i],
                             config.hi[i]);
    };

    // Calibrate temp0 so a typical uphill move is accepted with probability
    // near the target: temp0 = mean(positive dE) / -ln(target).
    std::vector<double> cand(dim);
    double uphill_sum = 0.0;
    int uphill_count = 0;
    for (int w = 0; w < config.sa_warmup && evals < config.budget; ++w) {
        propose(x, 1.0, cand);
        const double fc = objective(cand);
        ++evals;
        if (fc > fx) {
            uphill_sum += fc - fx;
            ++uphill_count;
        }
        if (fc < best) {
            best = fc;
            best_x = cand;
        }
        trace.record(evals, best);
    }
    const double mean_uphill = uphill_count > 0 ? uphill_sum / uphill_count : 1.0;
    const double temp0 = std::max(mean_uphill / -std::log(config.sa_accept_target), 1e-300);

    double temp = temp0;
    while (evals < config.budget) {
        for (int s = 0; s < config.sa_sweep && evals < config.budget; ++s) {
            propose(x, temp / temp0, cand);
            const double fc = objective(cand);
            ++evals;
            const double dE = fc - fx;
            if (dE <= 0.0 || rng.uniform01() < std::exp(-dE / temp)) {
                x = cand;
                fx = fc;
                if (fx < best) {
                    best = fx;
                    best_x = x;
                }
            }
            trace.record(evals, best);
        }
        temp *= config.sa_cool;
    }

    run.best_x = std::move(best_x);
    run.best_cost = best;
    run.evals = evals;
    run.budget_exhausted = evals >= config.budget;
    run.wall_seconds = seconds_since(t0);
    return run;
}

OptimizerRun genetic_algorithm(const Objective& objective, const OptimizerConfig& config) {
    check_box(config);
    const auto t0 = Clock::now();
    const int dim = static_cast<int>(config.lo.size());
    const int pop_size = std::max(2, config.ga_pop);
    const double mut_rate = config.ga_mut_rate < 0.0 ? 1.0 / dim : config.ga_mut_rate;

    OptimizerRun run;
    run.seed = config.seed;
    TraceRecorder trace{config.trace_stride, config.trace_stride ? &run.trace : nullptr};

    Rng rng(config.seed);
    std::vector<std::vector<double>> pop(pop_size, std::vector<double>(dim));
    std::vector<double> fit(pop_size);

    for (auto& ind : pop)
        for (int i = 0; i < dim; ++i) ind[i] = rng.uniform(config.lo[i], config.hi[i]);
    if (config.start) pop[0] = *config.start;

    long evals = 0;
    for (int j = 0; j < pop_size && evals < config.budget; ++j) {
        fit[j] = objective(pop[j]);
        ++evals;
        trace.record(evals, *std::min_element(fit.begin(), fit.begin() + j + 1));
    }

    auto best_index = [&] {
        return static_cast<int>(std::min_element(fit.begin(), fit.end()) - fit.begin());
    };
    int bi = best_index();
    std::vector<double> best_x = pop[bi];
    double best = fit[bi];

    auto tournament = [&]() -> int {
        int winner = static_cast<int>(rng.next_u64() % pop_size);
        for (int k = 1; k < config.ga_tournament; ++k) {
            const int ch = static_cast<int>(rng.next_u64() % pop_size);
            if (fit[ch] < fit[winner]) winner = ch;
        }
        return winner;
    };

    std::vector<std::vector<double>> next(pop_size, std::vector<double>(dim));
    std::vector<double> next_fit(pop_size);
    while (evals < config.budget) {
        // Elitism of 1: the incumbent survives unchanged (and keeps its
        // cached fitness), so best-so-far is non-increasing.
        next[0] = best_x;
        next_fit[0] = best;
        int filled = 1;
        for (; filled < pop_size && evals < config.budget; ++filled) {
            const auto& pa = pop[tournament()];
            const auto& pb = pop[tournament()];
            auto& child = next[filled];
            for (int i = 0; i < dim; ++i) {
                const double vlo = std::min(pa[i], pb[i]);
                const double vhi = std::max(pa[i], pb[i]);
                const double spread = vhi - vlo;
                const double a = config.ga_blx_alpha;
                double g = rng.uniform(vlo - a * spread, vhi + a * spread);
                if (rng.uniform01() < mut_rate)
                    g += config.ga_mut_scale_frac * (config.hi[i] - config.lo[i]) * rng.normal();
                child[i] = std::clamp(g, config.lo[i], config.hi[i]);
            }
            next_fit[filled] = objective(child);
            ++evals;
            if (next_fit[filled] < best) {
                best = next_fit[filled];
                best_x = child;
            }
            trace.record(evals, best);
        }
        pop.swap(next);
        fit.swap(next_fit);
        if (filled < pop_size) {  // budget ran out mid-generation
            pop.resize(filled);
            fit.resize(filled);
            break;
        }
    }

    run.best_x = std::move(best_x);
    run.best_cost = best;
    run.evals = evals;
    run.budget_exhausted = evals >= config.budget;
    run.wall_seconds = seconds_since(t0);
    return run;
}

OptimizerRun run_optimizer(const Objective& objective, const OptimizerConfig& config) {
    switch (config.method) {
        case Method::PatternSearch: return pattern_search(objective, config);
        case Method::SimulatedAnnealing: return simulated_annealing(objective, config);
        case Method::Genetic: return genetic_algorithm(objective, config);
    }
    throw std::logic_error("unreachable");
}

RestartSummary multi_restart(const Objective& objective, const OptimizerConfig& config,
                             int runs) {
    if (runs < 1) throw std::invalid_argument("multi_restart: runs must be >= 1");
    RestartSummary summary;
    summary.runs.reserve(runs);
    for (int i = 0; i < runs; ++i) {
        OptimizerConfig c = config;
        c.seed = config.seed + static_cast<std::uint64_t>(i);
        if (i > 0) c.start.reset();  // only the first run may use a warm start
        summary.runs.push_back(run_optimizer(objective, c));
    }
    summary.best_index = 0;
    double sum = 0.0;
    for (int i = 0; i < runs; ++i) {
        sum += summary.runs[i].best_cost;
        if (summary.runs[i].best_cost < summary.runs[summary.best_index].best_cost)
            summary.best_index = i;
    }
    summary.best_cost = summary.runs[summary.best_index].best_cost;
    summary.mean_cost = sum / runs;
    return summary;
}

std::pair<std::vector<double>, double> grid_oracle(const Objective& objective,
                                                   const std::vector<double>& lo,
                                                   const std::vector<double>& hi, int resolution,
                                                   long max_points) {
    if (lo.size() != hi.size() || lo.empty())
        throw std::invalid_argument("grid_oracle: bad box");
    if (resolution < 1) throw std::invalid_argument("grid_oracle: resolution must be >= 1");
    const int dim = static_cast<int>(lo.size());

    double total_d = 1.0;
    for (int i = 0; i < dim; ++i) total_d *= resolution;
    if (total_d > static_cast<double>(max_points))
        throw std::length_error("grid_oracle: grid of " + std::to_string(total_d) +
                                " points exceeds the guard of " + std::to_string(max_points));
    const long total = static_cast<long>(total_d);

    std::vector<int> idx(dim, 0);
    std::vector<double> x(dim), best_x(dim);
    double best = std::numeric_limits<double>::infinity();
    for (long count = 0; count < total; ++count) {
        for (int i = 0; i < dim; ++i)
            x[i] = resolution == 1 ? 0.5 * (lo[i] + hi[i])
                                   : lo[i] + (hi[i] - lo[i]) * idx[i] / (resolution - 1);
        const double fx = objective(x);
        if (fx < best) {  // strict: ties keep the first (lowest odometer) point
            best = fx;
            best_x = x;
        }
        for (int i = dim - 1; i >= 0; --i) {
            if (++idx[i] < resolution) break;
            idx[i] = 0;
        }
    }
    return {best_x, best};
}

ScheduleObjective::ScheduleObjective(const OcpProblem& p, GridKind kind, int n_steps,
                                     const TimeGrid& grid)
    : p_(&p), kind_(kind), n_(n_steps), grid_(grid) {
    decision_bounds(p, kind, n_steps, lo_, hi_);
}

ControlSchedule ScheduleObjective::decode_vector(const std::vector<double>& v) const {
    return decode(v, kind_, n_, p_->m, p_->T, p_->u_lo, p_->u_hi);
}

double ScheduleObjective::operator()(const std::vector<double>& v) {
    ++evals_;
    const ControlSchedule s = decode_vector(v);
    try {
        integrate_into(*p_, s, grid_, traj_, ws_);
    } catch (const IntegrationDiverged&) {
        // A diverging trial point is simply a terrible candidate, not a
        // reason to abort the search.
        return std::numeric_limits<double>::infinity();
    }
    const double raw = quadrature_running_cost(*p_, traj_, s);
    return minimized_cost(p_->sense, raw);
}

void decision_bounds(const OcpProblem& p, GridKind kind, int n_steps, std::vector<double>& lo,
                     std::vector<double>& hi) {
    lo.clear();
    hi.clear();
    if (kind == GridKind::Variable) {
        // Normalized increments: any point of [0,1]^n maps to a valid grid.
        lo.insert(lo.end(), n_steps, 0.0);
        hi.insert(hi.end(), n_steps, 1.0);
    }
    for (int k = 0; k < n_steps; ++k) {
        lo.insert(lo.end(), p.u_lo.begin(), p.u_lo.end());
        hi.insert(hi.end(), p.u_hi.begin(), p.u_hi.end());
    }
}

}  // namespace stepwise
