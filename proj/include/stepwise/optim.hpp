#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stepwise/ode.hpp"
#include "stepwise/problems.hpp"
#include "stepwise/rng.hpp"
#include "stepwise/schedule.hpp"

namespace stepwise {

using Objective = std::function<double(const std::vector<double>&)>;

enum class Method { PatternSearch, SimulatedAnnealing, Genetic };

Method method_from_string(const std::string& s);  // "ps" | "sa" | "ga"
std::string method_name(Method m);

struct OptimizerConfig {
    Method method = Method::PatternSearch;
    std::vector<double> lo, hi;  // box bounds per coordinate
    long budget = 20000;         // objective-evaluation budget
    std::uint64_t seed = 1;
    std::optional<std::vector<double>> start;  // default: uniform random in the box

    // Pattern search: initial step 0.25 * range per coordinate, halved on a
    // full failed poll, stop below delta_tol.
    double ps_delta0_frac = 0.25;
    double ps_delta_tol = 1e-9;

    // Simulated annealing: Gaussian proposals with sigma = sigma0 * temp/temp0,
    // reflected into the box; temp0 calibrated on warm-up proposals so the
    // initial acceptance rate is near accept_target; geometric cooling per sweep.
    double sa_sigma0_frac = 0.3;
    double sa_cool = 0.95;
    double sa_accept_target = 0.8;
    int sa_warmup = 100;
    int sa_sweep = 50;

    // Real-coded genetic algorithm: tournament selection, blend crossover,
    // per-coordinate Gaussian mutation, elitism of 1.
    int ga_pop = 50;
    int ga_tournament = 2;
    double ga_blx_alpha = 0.5;
    double ga_mut_rate = -1.0;  // -1 -> 1/dimension
    double ga_mut_scale_frac = 0.1;

    int trace_stride = 0;  // record (evals, best) every N evaluations; 0 = off
};

struct OptimizerRun {
    std::vector<double> best_x;
    double best_cost = 0.0;
    long evals = 0;
    std::uint64_t seed = 0;
    bool budget_exhausted = false;
    double wall_seconds = 0.0;
    std::vector<std::pair<long, double>> trace;  // downsampled (evals, best-so-far)
};

struct RestartSummary {
    std::vector<OptimizerRun> runs;
    int best_index = 0;
    double best_cost = 0.0;
    double mean_cost = 0.0;

    const OptimizerRun& best() const { return runs[best_index]; }
};

OptimizerRun pattern_search(const Objective& objective, const OptimizerConfig& config);
OptimizerRun simulated_annealing(const Objective& objective, const OptimizerConfig& config);
OptimizerRun genetic_algorithm(const Objective& objective, const OptimizerConfig& config);
OptimizerRun run_optimizer(const Objective& objective, const OptimizerConfig& config);

// `runs` independent optimizations seeded seed+0 ... seed+runs-1, each from a
// uniformly random start point in the box.  Exception: when config.start is
// set, the first run polls from it (warm start, e.g. a schedule sampled from
// the sweep baseline); later runs always draw their own uniform starts.
// Runs are independent (own generator state, pure objective), so results do
// not depend on execution order; they are executed sequentially here.
RestartSummary multi_restart(const Objective& objective, const OptimizerConfig& config, int runs);

// Exhaustive evaluation over a uniform grid with `resolution` points per
// axis.  Refuses grids above the guard (throws std::length_error naming the
// computed size).  Test/validation oracle, not an optimizer.
std::pair<std::vector<double>, double> grid_oracle(const Objective& objective,
                                                   const std::vector<double>& lo,
                                                   const std::vector<double>& hi, int resolution,
                                                   long max_points = 10000000);

// Adapts (problem, layout, grid) into a box-bounded objective over decision
// vectors: decode -> integrate -> quadrature -> sense transform.  Owns its
// integration workspace, so each instance must be used by one thread at a
// time; copies are independent.  Integration divergence maps to +inf.
class ScheduleObjective {
public:
    ScheduleObjective(const OcpProblem& p, GridKind kind, int n_steps, const TimeGrid& grid);

    double operator()(const std::vector<double>& v);

    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }
    ControlSchedule decode_vector(const std::vector<double>& v) const;
    long evaluations() const { return evals_; }

private:
    const OcpProblem* p_;
    GridKind kind_;
    int n_;
    TimeGrid grid_;
    std::vector<double> lo_, hi_;
    Trajectory traj_;
    OdeWorkspace ws_;
    long evals_ = 0;
};

// Box bounds for a decision vector: width increments in [0, 1] for variable
// layouts (scale-invariant under normalization), channel bounds for values.
void decision_bounds(const OcpProblem& p, GridKind kind, int n_steps, std::vector<double>& lo,
                     std::vector<double>& hi);

}  // namespace stepwise
