#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "stepwise/ode.hpp"
#include "stepwise/optim.hpp"
#include "stepwise/pmp.hpp"
#include "stepwise/problems.hpp"
#include "stepwise/schedule.hpp"

namespace stepwise {

// On-disk schedule form: {"breakpoints": [...], "values": [[...]], "T": ...,
// "bounds": {"lo": [...], "hi": [...]}}.  values is segment-major.
nlohmann::json schedule_to_json(const ControlSchedule& s);
ControlSchedule schedule_from_json(const nlohmann::json& j);

nlohmann::json cost_report_to_json(const CostReport& r);
nlohmann::json optimizer_run_to_json(const OptimizerRun& r);
nlohmann::json restart_summary_to_json(const RestartSummary& s);
nlohmann::json sweep_result_to_json(const SweepResult& r);

// One value - 17 significant digits, scientific, '.' decimal point regardless
// of locale (exact round-trip for doubles).
std::string format_double(double v);

// Plot-ready CSV, one row per grid node, header t,x1..xn,u1..um[,lam1..lamn].
void write_trajectory_csv(std::ostream& os, const Trajectory& t);
void write_sweep_csv(std::ostream& os, const SweepResult& r);

// Minimal JSON-Schema checker covering the subset the shipped schema uses:
// type, properties, required, items, enum, additionalProperties.  Returns an
// empty string when `doc` conforms, else a human-readable reason (first
// violation found, with a JSON-pointer-ish path).
std::string schema_violation(const nlohmann::json& schema, const nlohmann::json& doc);

}  // namespace stepwise
