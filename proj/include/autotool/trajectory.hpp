#pragma once
// Trajectory model: one executed tool call with structured inputs/outputs,
// ordered into trajectories, plus JSONL ingestion and validation.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "value.hpp"

namespace autotool {

enum class StepStatus { success, failure };
enum class StepSource { oracle, inertial };

inline const char* to_string(StepStatus s) { return s == StepStatus::success ? "success" : "failure"; }
inline const char* to_string(StepSource s) { return s == StepSource::oracle ? "oracle" : "inertial"; }

struct ToolInvocation {
    int step_index = 0;
    std::string tool_name;
    std::map<std::string, Value> inputs;
    std::map<std::string, Value> outputs;
    StepStatus status = StepStatus::success;
    StepSource source = StepSource::oracle;
    std::optional<std::string> raw_text;
};

struct Trajectory {
    std::string id;
    std::string task_goal;
    std::vector<ToolInvocation> invocations;
    std::vector<std::string> observations; // o_t precedes a_t, one per step
    std::map<std::string, std::string> metadata;
};

struct TrajectoryLog {
    std::vector<Trajectory> trajectories;
    std::set<std::string> tool_universe;

    void add(Trajectory t) {
        for (const auto& inv : t.invocations) tool_universe.insert(inv.tool_name);
        trajectories.push_back(std::move(t));
    }
};

enum class ViolationKind {
    length_mismatch,
    step_index_gap,
    empty_param_name,
    duplicate_id,
};

inline const char* to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::length_mismatch: return "length_mismatch";
        case ViolationKind::step_index_gap: return "step_index_gap";
        case ViolationKind::empty_param_name: return "empty_param_name";
        default: return "duplicate_id";
    }
}

struct Violation {
    ViolationKind kind;
    int step_index; // -1 for trajectory-level problems
    std::string detail;
};

namespace detail {

inline std::map<std::string, Value> params_from_json(const nlohmann::json& j,
                                                     const std::string& what) {
    if (!j.is_object()) throw SchemaError(what + " must be an object");
    std::map<std::string, Value> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key().empty()) throw SchemaError("empty parameter name in " + what);
        out.emplace(it.key(), value_from_json(it.value()));
    }
    return out;
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(std::string("missing required field: ") + name);
    return *it;
}

} // namespace detail

/// Parse one JSONL trajectory record. Unknown top-level fields are kept in
/// metadata (stringified).
inline Trajectory parse_trajectory_record(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), e.byte);
    }
    if (!j.is_object()) throw SchemaError("record must be a JSON object");

    Trajectory t;
    t.id = detail::require_field(j, "id").get<std::string>();
    t.task_goal = detail::require_field(j, "task_goal").get<std::string>();
    const auto& steps = detail::require_field(j, "steps");
    if (!steps.is_array()) throw SchemaError("steps must be an array");

    int expected_index = 0;
    for (const auto& s : steps) {
        ToolInvocation inv;
        inv.step_index = detail::require_field(s, "step_index").get<int>();
        if (inv.step_index != expected_index)
            throw SchemaError("step_index gap at " + std::to_string(expected_index));
        ++expected_index;
        t.observations.push_back(detail::require_field(s, "observation").get<std::string>());
        inv.tool_name = detail::require_field(s, "tool").get<std::string>();
        inv.inputs = detail::params_from_json(detail::require_field(s, "inputs"), "inputs");
        inv.outputs = detail::params_from_json(detail::require_field(s, "outputs"), "outputs");
        const std::string status = detail::require_field(s, "status").get<std::string>();
        if (status == "success") inv.status = StepStatus::success;
        else if (status == "failure") inv.status = StepStatus::failure;
        else throw SchemaError("unknown status: " + status);
        const std::string source = detail::require_field(s, "source").get<std::string>();
        if (source == "oracle") inv.source = StepSource::oracle;
        else if (source == "inertial") inv.source = StepSource::inertial;
        else throw SchemaError("unknown source: " + source);
        if (auto it = s.find("raw_text"); it != s.end() && !it->is_null())
            inv.raw_text = it->get<std::string>();
        t.invocations.push_back(std::move(inv));
    }

    if (auto it = j.find("metadata"); it != j.end()) {
        if (!it->is_object()) throw SchemaError("metadata must be an object");
        for (auto m = it->begin(); m != it->end(); ++m) {
            if (!m.value().is_string()) throw SchemaError("metadata values must be strings");
            t.metadata.emplace(m.key(), m.value().get<std::string>());
        }
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "id" || k == "task_goal" || k == "steps" || k == "metadata") continue;
        t.metadata.emplace(k, it.value().is_string() ? it.value().get<std::string>()
                                                     : it.value().dump());
    }
    return t;
}

inline std::string serialize_trajectory(const Trajectory& t) {
    nlohmann::json j;
    j["id"] = t.id;
    j["task_goal"] = t.task_goal;
    j["steps"] = nlohmann::json::array();
    for (std::size_t i = 0; i < t.invocations.size(); ++i) {
        const auto& inv = t.invocations[i];
        nlohmann::json s;
        s["step_index"] = inv.step_index;
        s["observation"] = i < t.observations.size() ? t.observations[i] : "";
        s["tool"] = inv.tool_name;
        s["inputs"] = nlohmann::json::object();
        for (const auto& [k, v] : inv.inputs) s["inputs"][k] = value_to_json(v);
        s["outputs"] = nlohmann::json::object();
        for (const auto& [k, v] : inv.outputs) s["outputs"][k] = value_to_json(v);
        s["status"] = to_string(inv.status);
        s["source"] = to_string(inv.source);
        if (inv.raw_text) s["raw_text"] = *inv.raw_text;
        j["steps"].push_back(std::move(s));
    }
    if (!t.metadata.empty()) {
        j["metadata"] = nlohmann::json::object();
        for (const auto& [k, v] : t.metadata) j["metadata"][k] = v;
    }
    return j.dump();
}

/// Total: reports invariant violations instead of throwing.
inline std::vector<Violation> validate_trajectory(const Trajectory& t) {
    std::vector<Violation> out;
    if (t.observations.size() != t.invocations.size())
        out.push_back({ViolationKind::length_mismatch, -1,
                       "observations " + std::to_string(t.observations.size()) +
                           " vs invocations " + std::to_string(t.invocations.size())});
    for (std::size_t i = 0; i < t.invocations.size(); ++i) {
        const auto& inv = t.invocations[i];
        if (inv.step_index != static_cast<int>(i))
            out.push_back({ViolationKind::step_index_gap, static_cast<int>(i),
                           "expected " + std::to_string(i) + " got " +
                               std::to_string(inv.step_index)});
        for (const auto& [k, v] : inv.inputs) {
            (void)v;
            if (k.empty())
                out.push_back({ViolationKind::empty_param_name, static_cast<int>(i), "input"});
        }
        for (const auto& [k, v] : inv.outputs) {
            (void)v;
            if (k.empty())
                out.push_back({ViolationKind::empty_param_name, static_cast<int>(i), "output"});
        }
    }
    return out;
}

inline std::vector<Violation> validate_log(const TrajectoryLog& log) {
    std::vector<Violation> out;
    std::set<std::string> seen;
    for (const auto& t : log.trajectories) {
        auto v = validate_trajectory(t);
        out.insert(out.end(), v.begin(), v.end());
        if (!seen.insert(t.id).second)
            out.push_back({ViolationKind::duplicate_id, -1, t.id});
    }
    return out;
}

/// Contiguous windows of k consecutive tool names, in order.
inline std::vector<std::vector<std::string>> tool_windows(const Trajectory& t, int k) {
    if (k <= 0) throw ArgumentError("window size must be >= 1");
    std::vector<std::vector<std::string>> out;
    const int n = static_cast<int>(t.invocations.size());
    for (int i = 0; i + k <= n; ++i) {
        std::vector<std::string> w;
        w.reserve(k);
        for (int j = 0; j < k; ++j) w.push_back(t.invocations[i + j].tool_name);
        out.push_back(std::move(w));
    }
    return out;
}

} // namespace autotool
