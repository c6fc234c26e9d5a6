// Command-line front end: stepwise optimization runs, the PMP baseline,
// side-by-side comparison, and problem listings, with JSON/CSV outputs.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stepwise/ode.hpp"
#include "stepwise/optim.hpp"
#include "stepwise/pmp.hpp"
#include "stepwise/problems.hpp"
#include "stepwise/schedule.hpp"
#include "stepwise/serialize.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kToolVersion = "1.0.0";
constexpr const char* kSchemaVersion = "1";

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// ---- configuration plumbing ------------------------------------------------
//
// Every flag has a config-file equivalent: --config FILE loads a flat JSON
// object whose keys are the long flag names (without --, '-' or '_'
// interchangeable); explicit command-line flags win.  Unknown keys are a hard
// error so typos cannot silently change a run.

std::string canon_key(std::string k) {
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
}

class ConfigLayer {
public:
    explicit ConfigLayer(CLI::App* cmd) : cmd_(cmd) {
        cmd->add_option("--config", path_, "JSON config file; explicit flags override it");
    }

    // Call after parsing: overlays config values onto options the user did
    // not pass on the command line.
    void apply() {
        if (path_.empty()) return;
        std::ifstream in(path_);
        if (!in) throw CLI::ValidationError("--config", "cannot open '" + path_ + "'");
        json cfg;
        try {
            in >> cfg;
        } catch (const json::exception& e) {
            throw CLI::ValidationError("--config", std::string("bad JSON: ") + e.what());
        }
        if (!cfg.is_object()) throw CLI::ValidationError("--config", "top level must be an object");
        for (const auto& [raw_key, value] : cfg.items()) {
            const std::string key = canon_key(raw_key);
            CLI::Option* opt = find_option(key);
            if (!opt)
                throw CLI::ValidationError("--config",
                                           "unknown key '" + raw_key + "' for this subcommand");
            if (opt->count() > 0) continue;  // explicit flag wins
            if (value.is_array()) {
                for (const auto& item : value) opt->add_result(to_string(item));
            } else {
                opt->add_result(to_string(value));
            }
            opt->run_callback();
        }
    }

private:
    static std::string to_string(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }

    CLI::Option* find_option(const std::string& key) {
        for (CLI::Option* opt : cmd_->get_options()) {
            for (const std::string& name : opt->get_lnames())
                if (canon_key(name) == key) return opt;
        }
        return nullptr;
    }

    CLI::App* cmd_;
    std::string path_;
};

struct ProblemArgs {
    std::string problem;
    std::vector<std::string> overrides;  // key=value
    int grid_steps = 0;                  // 0 = problem default

    void attach(CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--problem", problem, "problem name (intro|chemo|dsdi)");
        if (required) opt->required();
        cmd->add_option("--override", overrides,
                        "problem parameter override key=value (repeatable)");
        cmd->add_option("--grid-steps", grid_steps,
                        "integration steps over [0,T] (default: per-problem h)");
    }

    stepwise::OcpProblem resolve(json* manifest_overrides) const {
        stepwise::OcpProblem p = stepwise::builtin(problem);
        json ov = json::object();
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw CLI::ValidationError("--override", "expected key=value, got '" + kv + "'");
            const std::string key = kv.substr(0, eq);
            double value = 0.0;
            try {
                value = std::stod(kv.substr(eq + 1));
            } catch (const std::exception&) {
                throw CLI::ValidationError("--override", "bad number in '" + kv + "'");
            }
            stepwise::apply_override(p, key, value);
            ov[key] = value;
        }
        if (manifest_overrides) *manifest_overrides = std::move(ov);
        return p;
    }

    stepwise::TimeGrid grid_for(const stepwise::OcpProblem& p) const {
        if (grid_steps <= 0) return stepwise::default_grid(p);
        return stepwise::TimeGrid(0.0, p.T, grid_steps);
    }
};

struct OptimArgs {
    std::string mode = "fixed";
    int steps = 3;
    std::string optimizer = "ps";
    int restarts = 1;
    std::uint64_t seed = 1;
    long budget = 20000;
    // Method settings (defaults match OptimizerConfig).
    stepwise::OptimizerConfig knobs;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mode", mode, "grid kind: fixed|variable")
            ->check(CLI::IsMember({"fixed", "variable"}));
        cmd->add_option("--steps", steps, "number of control segments")->check(CLI::PositiveNumber);
        cmd->add_option("--optimizer", optimizer, "ps|sa|ga")
            ->check(CLI::IsMember({"ps", "sa", "ga"}));
        cmd->add_option("--restarts", restarts, "independent restarts (seed+0..seed+R-1)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "base random seed");
        cmd->add_option("--budget", budget, "objective evaluations per restart")
            ->check(CLI::PositiveNumber);

        cmd->add_option("--ps-delta0-frac", knobs.ps_delta0_frac,
                        "pattern search: initial step as fraction of range");
        cmd->add_option("--ps-delta-tol", knobs.ps_delta_tol, "pattern search: stop mesh size");
        cmd->add_option("--sa-sigma0-frac", knobs.sa_sigma0_frac,
                        "annealing: proposal sigma as fraction of range");
        cmd->add_option("--sa-cool", knobs.sa_cool, "annealing: geometric cooling factor");
        cmd->add_option("--sa-accept-target", knobs.sa_accept_target,
                        "annealing: calibrated initial acceptance rate");
        cmd->add_option("--sa-warmup", knobs.sa_warmup, "annealing: calibration proposals");
        cmd->add_option("--sa-sweep", knobs.sa_sweep, "annealing: proposals per temperature");
        cmd->add_option("--ga-pop", knobs.ga_pop, "genetic: population size");
        cmd->add_option("--ga-tournament", knobs.ga_tournament, "genetic: tournament size");
        cmd->add_option("--ga-blx-alpha", knobs.ga_blx_alpha, "genetic: blend crossover alpha");
        cmd->add_option("--ga-mut-rate", knobs.ga_mut_rate,
                        "genetic: per-coordinate mutation rate (-1 = 1/dim)");
        cmd->add_option("--ga-mut-scale-frac", knobs.ga_mut_scale_frac,
                        "genetic: mutation sigma as fraction of range");
    }

    stepwise::GridKind kind() const {
        return mode == "fixed" ? stepwise::GridKind::Fixed : stepwise::GridKind::Variable;
    }

    json settings_json() const {
        const stepwise::OptimizerConfig& k = knobs;
        return json{{"ps_delta0_frac", k.ps_delta0_frac},
                    {"ps_delta_tol", k.ps_delta_tol},
                    {"sa_sigma0_frac", k.sa_sigma0_frac},
                    {"sa_cool", k.sa_cool},
                    {"sa_accept_target", k.sa_accept_target},
                    {"sa_warmup", k.sa_warmup},
                    {"sa_sweep", k.sa_sweep},
                    {"ga_pop", k.ga_pop},
                    {"ga_tournament", k.ga_tournament},
                    {"ga_blx_alpha", k.ga_blx_alpha},
                    {"ga_mut_rate", k.ga_mut_rate},
                    {"ga_mut_scale_frac", k.ga_mut_scale_frac}};
    }
};

struct FbsArgs {
    double relax = 0.5;
    double tol = 1e-3;
    int max_iter = 500;

    void attach(CLI::App* cmd) {
        cmd->add_option("--relax", relax, "control relaxation factor in (0,1]");
        cmd->add_option("--tol", tol, "relative control-change convergence tolerance");
        cmd->add_option("--max-iter", max_iter, "sweep iteration cap")->check(CLI::PositiveNumber);
    }
};

ordered_json base_manifest(const std::string& command, const std::string& problem,
                           const json& overrides, const stepwise::TimeGrid& grid) {
    ordered_json m;
    m["tool"] = "stepwise";
    m["version"] = kToolVersion;
    m["timestamp"] = timestamp_utc();
    m["command"] = command;
    m["problem"] = problem;
    m["overrides"] = overrides;
    m["grid"] = {{"t0", grid.t0}, {"t_end", grid.t_end}, {"step_count", grid.step_count}};
    return m;
}

void write_record(const std::string& path, const ordered_json& record) {
    std::ofstream out(path);
    if (!out) throw CLI::ValidationError("--out", "cannot write '" + path + "'");
    out << record.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text, const char* flag) {
    std::ofstream out(path);
    if (!out) throw CLI::ValidationError(flag, "cannot write '" + path + "'");
    out << text;
}

// ---- subcommand payloads ---------------------------------------------------

struct SolveOutcome {
    ordered_json record;
    stepwise::ControlSchedule best;
    stepwise::CostReport cost;
    stepwise::RestartSummary summary;
};

SolveOutcome run_solve(const stepwise::OcpProblem& p, const stepwise::TimeGrid& grid,
                       const OptimArgs& oa, const json& overrides_json) {
    stepwise::ScheduleObjective objective(p, oa.kind(), oa.steps, grid);
    stepwise::OptimizerConfig cfg = oa.knobs;
    cfg.method = stepwise::method_from_string(oa.optimizer);
    cfg.lo = objective.lo();
    cfg.hi = objective.hi();
    cfg.budget = oa.budget;
    cfg.seed = oa.seed;

    // ScheduleObjective owns a mutable workspace; share one instance by ref.
    stepwise::RestartSummary summary = stepwise::multi_restart(
        [&objective](const std::vector<double>& v) { return objective(v); }, cfg, oa.restarts);

    SolveOutcome out;
    out.best = objective.decode_vector(summary.best().best_x);
    out.cost = stepwise::evaluate_cost(p, out.best, grid);
    out.summary = std::move(summary);

    ordered_json manifest = base_manifest("solve", p.name, overrides_json, grid);
    manifest["mode"] = oa.mode;
    manifest["steps"] = oa.steps;
    manifest["optimizer"] = stepwise::method_name(cfg.method);
    manifest["restarts"] = static_cast<int>(out.summary.runs.size());
    manifest["seed"] = oa.seed;
    manifest["budget"] = oa.budget;
    manifest["optimizer_settings"] = oa.settings_json();

    out.record["schema_version"] = kSchemaVersion;
    out.record["manifest"] = std::move(manifest);
    out.record["best_schedule"] = stepwise::schedule_to_json(out.best);
    out.record["cost"] = stepwise::cost_report_to_json(out.cost);
    out.record["restarts"] = stepwise::restart_summary_to_json(out.summary);
    return out;
}

int cmd_solve(const ProblemArgs& pa, const OptimArgs& oa, const std::string& out_path,
              const std::string& traj_path) {
    json overrides_json;
    const stepwise::OcpProblem p = pa.resolve(&overrides_json);
    const stepwise::TimeGrid grid = pa.grid_for(p);
    const auto t0 = std::chrono::steady_clock::now();
    SolveOutcome out = run_solve(p, grid, oa, overrides_json);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    long evals = 0;
    for (const auto& r : out.summary.runs) evals += r.evals;
    std::printf("best minimized %s  raw J %s  evals %ld  wall %.2fs\n",
                stepwise::format_double(out.cost.minimized).c_str(),
                stepwise::format_double(out.cost.raw).c_str(), evals, wall);

    if (!out_path.empty()) write_record(out_path, out.record);
    if (!traj_path.empty()) {
        std::ostringstream csv;
        stepwise::write_trajectory_csv(csv, stepwise::integrate(p, out.best, grid));
        write_text(traj_path, csv.str(), "--traj");
    }
    return 0;
}

int cmd_pmp(const ProblemArgs& pa, const FbsArgs& fa, const std::string& out_path,
            const std::string& traj_path) {
    json overrides_json;
    const stepwise::OcpProblem p = pa.resolve(&overrides_json);
    const stepwise::TimeGrid grid = pa.grid_for(p);

    const stepwise::SweepResult sweep = stepwise::fbs(p, grid, fa.relax, fa.tol, fa.max_iter);
    std::printf("pmp raw J %s  minimized %s  iterations %d  converged %s\n",
                stepwise::format_double(sweep.raw_cost).c_str(),
                stepwise::format_double(sweep.minimized_cost).c_str(), sweep.iterations,
                sweep.converged ? "yes" : "no");
    if (!sweep.converged)
        std::fprintf(stderr, "warning: sweep hit the iteration cap before converging\n");

    if (!out_path.empty()) {
        ordered_json manifest = base_manifest("pmp", p.name, overrides_json, grid);
        manifest["fbs"] = {{"relax", fa.relax}, {"tol", fa.tol}, {"max_iter", fa.max_iter}};
        ordered_json record;
        record["schema_version"] = kSchemaVersion;
        record["manifest"] = std::move(manifest);
        record["sweep"] = stepwise::sweep_result_to_json(sweep);
        write_record(out_path, record);
    }
    if (!traj_path.empty()) {
        std::ostringstream csv;
        stepwise::write_sweep_csv(csv, sweep);
        write_text(traj_path, csv.str(), "--traj");
    }
    return 0;
}

int cmd_compare(const ProblemArgs& pa, const OptimArgs& oa, const FbsArgs& fa,
                const std::string& steps_list, const std::string& out_path) {
    json overrides_json;
    const stepwise::OcpProblem p = pa.resolve(&overrides_json);
    const stepwise::TimeGrid grid = pa.grid_for(p);

    std::vector<int> steps;
    {
        std::stringstream ss(steps_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                steps.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw CLI::ValidationError("--steps-list", "bad entry '" + item + "'");
            }
            if (steps.back() < 1)
                throw CLI::ValidationError("--steps-list", "step counts must be >= 1");
        }
        if (steps.empty()) throw CLI::ValidationError("--steps-list", "no step counts given");
    }

    const stepwise::SweepResult sweep = stepwise::fbs(p, grid, fa.relax, fa.tol, fa.max_iter);

    struct Row {
        int steps;
        stepwise::CostReport cost;
    };
    std::vector<Row> rows;
    for (const int n : steps) {
        OptimArgs one = oa;
        one.steps = n;
        rows.push_back({n, run_solve(p, grid, one, overrides_json).cost});
    }

    std::printf("%-18s %16s %16s %14s\n", "method", "minimized", "raw J", "gap-to-pmp");
    std::printf("%-18s %16.10f %16.8f %14s\n", "pmp", sweep.minimized_cost, sweep.raw_cost, "--");
    for (const Row& r : rows) {
        const std::string label =
            "stepwise-" + std::to_string(r.steps) + " (" + oa.optimizer + ")";
        std::printf("%-18s %16.10f %16.8f %14.6e\n", label.c_str(), r.cost.minimized, r.cost.raw,
                    r.cost.minimized - sweep.minimized_cost);
    }

    if (!out_path.empty()) {
        ordered_json manifest = base_manifest("compare", p.name, overrides_json, grid);
        manifest["mode"] = oa.mode;
        manifest["optimizer"] = oa.optimizer;
        manifest["restarts"] = oa.restarts;
        manifest["seed"] = oa.seed;
        manifest["budget"] = oa.budget;
        manifest["steps_list"] = steps;
        manifest["fbs"] = {{"relax", fa.relax}, {"tol", fa.tol}, {"max_iter", fa.max_iter}};
        ordered_json record;
        record["schema_version"] = kSchemaVersion;
        record["manifest"] = std::move(manifest);
        record["pmp"] = stepwise::sweep_result_to_json(sweep);
        ordered_json table = ordered_json::array();
        for (const Row& r : rows) {
            ordered_json row;
            row["steps"] = r.steps;
            row["minimized"] = r.cost.minimized;
            row["raw"] = r.cost.raw;
            row["gap_to_pmp"] = r.cost.minimized - sweep.minimized_cost;
            table.push_back(std::move(row));
        }
        record["stepwise"] = std::move(table);
        write_record(out_path, record);
    }
    return 0;
}

int cmd_list(bool as_json, const std::string& problem) {
    if (!problem.empty()) {
        const stepwise::OcpProblem p = stepwise::builtin(problem);
        if (as_json) {
            ordered_json j;
            j["name"] = p.name;
            j["state_dim"] = p.n_x;
            j["control_dim"] = p.m;
            j["T"] = p.T;
            j["x0"] = p.x0;
            j["bounds"] = {{"lo", p.u_lo}, {"hi", p.u_hi}};
            j["sense"] = p.sense == stepwise::Sense::Maximize ? "maximize" : "minimize";
            j["default_grid_steps"] = stepwise::default_grid(p).step_count;
            ordered_json params = ordered_json::object();
            for (const auto& [key, value] : stepwise::parameters(p)) params[key] = value;
            j["parameters"] = std::move(params);
            std::cout << j.dump(2) << "\n";
        } else {
            std::printf("%s: n_x=%d m=%d T=%g sense=%s default_grid_steps=%d\n", p.name.c_str(),
                        p.n_x, p.m, p.T,
                        p.sense == stepwise::Sense::Maximize ? "maximize" : "minimize",
                        stepwise::default_grid(p).step_count);
            for (const auto& [key, value] : stepwise::parameters(p))
                std::printf("  %-8s = %g\n", key.c_str(), value);
        }
        return 0;
    }

    if (as_json) {
        ordered_json rows = ordered_json::array();
        for (const auto& name : stepwise::builtin_names()) {
            const stepwise::OcpProblem p = stepwise::builtin(name);
            ordered_json j;
            j["name"] = p.name;
            j["state_dim"] = p.n_x;
            j["control_dim"] = p.m;
            j["T"] = p.T;
            j["bounds"] = {{"lo", p.u_lo}, {"hi", p.u_hi}};
            j["default_grid_steps"] = stepwise::default_grid(p).step_count;
            rows.push_back(std::move(j));
        }
        std::cout << rows.dump(2) << "\n";
    } else {
        std::printf("%-8s %6s %6s %10s %10s %18s\n", "name", "n_x", "m", "T", "grid", "bounds");
        for (const auto& name : stepwise::builtin_names()) {
            const stepwise::OcpProblem p = stepwise::builtin(name);
            std::string bounds = "[" + std::to_string(p.u_lo[0]).substr(0, 4) + ", " +
                                 std::to_string(p.u_hi[0]).substr(0, 4) + "]";
            if (p.m > 1) bounds += " x" + std::to_string(p.m);
            std::printf("%-8s %6d %6d %10g %10d %18s\n", p.name.c_str(), p.n_x, p.m, p.T,
                        stepwise::default_grid(p).step_count, bounds.c_str());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise-constant (stepwise) optimal control toolkit"};
    app.require_subcommand(1);

    // --- solve ---
    CLI::App* solve = app.add_subcommand("solve", "optimize a stepwise control schedule");
    ProblemArgs solve_p;
    OptimArgs solve_o;
    std::string solve_out, solve_traj;
    solve_p.attach(solve, /*required=*/false);
    solve_o.attach(solve);
    solve->add_option("--out", solve_out, "write the result record JSON here");
    solve->add_option("--traj", solve_traj, "write the best schedule's trajectory CSV here");
    ConfigLayer solve_cfg(solve);

    // --- pmp ---
    CLI::App* pmp = app.add_subcommand("pmp", "forward-backward sweep baseline");
    ProblemArgs pmp_p;
    FbsArgs pmp_f;
    std::string pmp_out, pmp_traj;
    pmp_p.attach(pmp, /*required=*/false);
    pmp_f.attach(pmp);
    pmp->add_option("--out", pmp_out, "write the sweep record JSON here");
    pmp->add_option("--traj", pmp_traj, "write the sweep trajectory CSV here (with adjoints)");
    ConfigLayer pmp_cfg(pmp);

    // --- compare ---
    CLI::App* compare = app.add_subcommand("compare", "stepwise vs the sweep baseline");
    ProblemArgs cmp_p;
    OptimArgs cmp_o;
    FbsArgs cmp_f;
    std::string cmp_steps = "3,5";
    std::string cmp_out;
    cmp_p.attach(compare, /*required=*/false);
    cmp_o.attach(compare);
    cmp_f.attach(compare);
    compare->add_option("--steps-list", cmp_steps, "comma-separated step counts (default 3,5)");
    compare->add_option("--out", cmp_out, "write the comparison JSON here");
    ConfigLayer cmp_cfg(compare);

    // --- list ---
    CLI::App* list = app.add_subcommand("list", "list built-in problems");
    bool list_json = false;
    std::string list_problem;
    list->add_flag("--json", list_json, "machine-readable output");
    list->add_option("--problem", list_problem, "dump one problem's full parameter set");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) {
            solve_cfg.apply();
            if (solve_p.problem.empty())
                throw CLI::ValidationError("--problem", "a problem name is required");
            return cmd_solve(solve_p, solve_o, solve_out, solve_traj);
        }
        if (pmp->parsed()) {
            pmp_cfg.apply();
            if (pmp_p.problem.empty())
                throw CLI::ValidationError("--problem", "a problem name is required");
            return cmd_pmp(pmp_p, pmp_f, pmp_out, pmp_traj);
        }
        if (compare->parsed()) {
            cmp_cfg.apply();
            if (cmp_p.problem.empty())
                throw CLI::ValidationError("--problem", "a problem name is required");
            return cmd_compare(cmp_p, cmp_o, cmp_f, cmp_steps, cmp_out);
        }
        if (list->parsed()) return cmd_list(list_json, list_problem);
    } catch (const stepwise::IntegrationDiverged& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const stepwise::UnknownProblem& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const stepwise::UnknownParameter& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return 0;
}
