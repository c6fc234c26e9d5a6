#include "stepwise/serialize.hpp"

#include <charconv>
#include <ostream>

namespace stepwise {

using nlohmann::json;

json schedule_to_json(const ControlSchedule& s) {
    json values = json::array();
    for (int k = 0; k < s.segments(); ++k) {
        json row = json::array();
        for (int c = 0; c < s.m; ++c) row.push_back(s.value(k)[c]);
        values.push_back(std::move(row));
    }
    return json{{"breakpoints", s.breakpoints},
                {"values", values},
                {"T", s.T},
                {"bounds", json{{"lo", s.lo}, {"hi", s.hi}}}};
}

ControlSchedule schedule_from_json(const json& j) {
    ControlSchedule s;
    try {
        s.T = j.at("T").get<double>();
        s.breakpoints = j.at("breakpoints").get<std::vector<double>>();
        const auto& values = j.at("values");
        if (values.empty()) throw std::invalid_argument("schedule JSON: empty values");
        s.m = static_cast<int>(values.front().size());
        for (const auto& row : values) {
            if (static_cast<int>(row.size()) != s.m)
                throw std::invalid_argument("schedule JSON: ragged values");
            for (const auto& v : row) s.values.push_back(v.get<double>());
        }
        s.lo = j.at("bounds").at("lo").get<std::vector<double>>();
        s.hi = j.at("bounds").at("hi").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("schedule JSON: ") + e.what());
    }
    s.validate();
    return s;
}

json cost_report_to_json(const CostReport& r) {
    return json{{"raw", r.raw},
                {"minimized", r.minimized},
                {"infeasible", r.infeasible},
                {"grid", json{{"t0", r.grid.t0}, {"t_end", r.grid.t_end},
                              {"step_count", r.grid.step_count}}},
                {"schedule", schedule_to_json(r.schedule)}};
}

json optimizer_run_to_json(const OptimizerRun& r) {
    json trace = json::array();
    for (const auto& [evals, best] : r.trace) trace.push_back(json{{"evals", evals}, {"best", best}});
    // Wall time is deliberately omitted: records must be byte-identical
    // across reruns with the same seed.
    return json{{"best_vector", r.best_x},
                {"best_cost", r.best_cost},
                {"evaluations", r.evals},
                {"seed", r.seed},
                {"budget_exhausted", r.budget_exhausted},
                {"trace", std::move(trace)}};
}

json restart_summary_to_json(const RestartSummary& s) {
    json per_run = json::array();
    for (const auto& r : s.runs)
        per_run.push_back(json{{"best_cost", r.best_cost},
                               {"evaluations", r.evals},
                               {"seed", r.seed}});
    return json{{"runs", s.runs.size()},
                {"best_cost", s.best_cost},
                {"mean_cost", s.mean_cost},
                {"best_index", s.best_index},
                {"per_run", std::move(per_run)}};
}

json sweep_result_to_json(const SweepResult& r) {
    return json{{"raw_cost", r.raw_cost},
                {"minimized_cost", r.minimized_cost},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"grid", json{{"t0", r.grid.t0}, {"t_end", r.grid.t_end},
                              {"step_count", r.grid.step_count}}}};
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
    return std::string(buf, ptr);
}

namespace {

void write_csv_header(std::ostream& os, int n_x, int m, bool adjoints) {
    os << "t";
    for (int i = 1; i <= n_x; ++i) os << ",x" << i;
    for (int c = 1; c <= m; ++c) os << ",u" << c;
    if (adjoints)
        for (int i = 1; i <= n_x; ++i) os << ",lam" << i;
    os << "\n";
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    write_csv_header(os, t.n_x, t.m, false);
    for (int k = 0; k < t.grid.nodes(); ++k) {
        os << format_double(t.grid.node(k));
        for (int i = 0; i < t.n_x; ++i) os << "," << format_double(t.state(k)[i]);
        for (int c = 0; c < t.m; ++c) os << "," << format_double(t.control(k)[c]);
        os << "\n";
    }
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    write_csv_header(os, r.n_x, r.m, true);
    for (int k = 0; k < r.grid.nodes(); ++k) {
        os << format_double(r.grid.node(k));
        for (int i = 0; i < r.n_x; ++i) os << "," << format_double(r.state(k)[i]);
        for (int c = 0; c < r.m; ++c) os << "," << format_double(r.control(k)[c]);
        for (int i = 0; i < r.n_x; ++i) os << "," << format_double(r.adjoint(k)[i]);
        os << "\n";
    }
}

namespace {

bool type_matches(const std::string& want, const json& doc) {
    if (want == "object") return doc.is_object();
    if (want == "array") return doc.is_array();
    if (want == "string") return doc.is_string();
    if (want == "number") return doc.is_number();
    if (want == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
    if (want == "boolean") return doc.is_boolean();
    if (want == "null") return doc.is_null();
    return false;
}

std::string check(const json& schema, const json& doc, const std::string& path) {
    if (schema.contains("type")) {
        const auto& t = schema["type"];
        bool ok = false;
        if (t.is_array()) {
            for (const auto& alt : t) ok = ok || type_matches(alt.get<std::string>(), doc);
        } else {
            ok = type_matches(t.get<std::string>(), doc);
        }
        if (!ok) return path + ": expected type " + t.dump() + ", got " + doc.type_name();
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& v : schema["enum"]) ok = ok || v == doc;
        if (!ok) return path + ": value " + doc.dump() + " not in enum";
    }
    if (doc.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema["required"])
                if (!doc.contains(key.get<std::string>()))
                    return path + ": missing required key '" + key.get<std::string>() + "'";
        const json props = schema.value("properties", json::object());
        for (const auto& [key, sub] : doc.items()) {
            if (props.contains(key)) {
                const std::string err = check(props[key], sub, path + "/" + key);
                if (!err.empty()) return err;
            } else if (schema.contains("additionalProperties") &&
                       schema["additionalProperties"].is_boolean() &&
                       !schema["additionalProperties"].get<bool>()) {
                return path + ": unexpected key '" + key + "'";
            }
        }
    }
    if (doc.is_array() && schema.contains("items")) {
        int i = 0;
        for (const auto& sub : doc) {
            const std::string err = check(schema["items"], sub, path + "/" + std::to_string(i++));
            if (!err.empty()) return err;
        }
    }
    return "";
}

}  // namespace

std::string schema_violation(const json& schema, const json& doc) {
    return check(schema, doc, "$");
}

}  // namespace stepwise
