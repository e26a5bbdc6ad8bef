#pragma once
// Environment adapter contract: decouples the generic parameter-filling
// logic from environment-specific action formats and state tracking.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "tig.hpp"
#include "value.hpp"

namespace autotool {

struct ParsedAction {
    std::string tool_name;
    std::map<std::string, Value> inputs;
};

class EnvironmentAdapter {
public:
    virtual ~EnvironmentAdapter() = default;

    virtual void reset(const std::string& initial_observation) = 0;

    /// Parse free-form action text into (tool, inputs); nullopt when the
    /// text is not a recognizable action.
    virtual std::optional<ParsedAction> parse_action(
        const std::string& action_text, const std::vector<ToolSpec>& tool_descriptions) = 0;

    /// Derive structured outputs from a raw execution result.
    virtual std::map<std::string, Value> infer_output(const std::string& tool_name,
                                                      const std::map<std::string, Value>& inputs,
                                                      const std::string& raw_result) = 0;

    virtual void update_state(const ParsedAction& parsed,
                              const std::map<std::string, Value>& structured_outputs) = 0;

    /// Fill missing parameters from tracked environment state.
    virtual std::map<std::string, Value> get_contextual_params(
        const std::string& action_type, const std::set<std::string>& missing_params,
        const std::vector<ParamSpec>& required_params_info) = 0;

    /// Inverse of parse_action for every supported tool.
    virtual std::string generate_action_from_params(
        const std::string& action_type, const std::map<std::string, Value>& params) = 0;
};

namespace detail {

inline std::string render_param_value(const Value& v) {
    switch (v.index()) {
        case 0: return std::get<std::string>(v);
        case 1: return value_to_json(v).dump();
        case 2: return std::get<bool>(v) ? "true" : "false";
        default: {
            std::string s;
            const auto& items = std::get<std::vector<std::string>>(v);
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) s += "|";
                s += items[i];
            }
            return s;
        }
    }
}

} // namespace detail

/// Canonical textual action format shared by the shipped adapters:
/// `tool(param=value, param=value)` with string-valued parameters.
inline std::string format_canonical_action(const std::string& tool,
                                           const std::map<std::string, Value>& params) {
    std::string out = tool + "(";
    bool first = true;
    for (const auto& [k, v] : params) {
        if (!first) out += ", ";
        first = false;
        out += k + "=" + detail::render_param_value(v);
    }
    out += ")";
    return out;
}

inline std::optional<ParsedAction> parse_canonical_action(const std::string& action_text) {
    const std::string text = trim_copy(action_text);
    const auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')') return std::nullopt;
    ParsedAction action;
    action.tool_name = trim_copy(text.substr(0, open));
    if (action.tool_name.empty()) return std::nullopt;
    std::string body = text.substr(open + 1, text.size() - open - 2);
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto comma = body.find(',', pos);
        if (comma == std::string::npos) comma = body.size();
        const std::string piece = trim_copy(body.substr(pos, comma - pos));
        pos = comma + 1;
        if (piece.empty()) continue;
        const auto eq = piece.find('=');
        if (eq == std::string::npos) return std::nullopt;
        const std::string key = trim_copy(piece.substr(0, eq));
        if (key.empty()) return std::nullopt;
        action.inputs[key] = trim_copy(piece.substr(eq + 1));
    }
    return action;
}

/// Answers from a recorded trajectory: actions are the canonical format and
/// outputs are replayed from the matching recorded step.
class ReplayAdapter final : public EnvironmentAdapter {
public:
    explicit ReplayAdapter(Trajectory recorded) : recorded_(std::move(recorded)) {}

    void reset(const std::string&) override {
        cursor_ = 0;
        state_.clear();
    }

    std::optional<ParsedAction> parse_action(const std::string& action_text,
                                             const std::vector<ToolSpec>&) override {
        return parse_canonical_action(action_text);
    }

    std::map<std::string, Value> infer_output(const std::string& tool_name,
                                              const std::map<std::string, Value>&,
                                              const std::string&) override {
        for (std::size_t i = cursor_; i < recorded_.invocations.size(); ++i) {
            if (recorded_.invocations[i].tool_name == tool_name) {
                cursor_ = i + 1;
                return recorded_.invocations[i].outputs;
            }
        }
        return {};
    }

    void update_state(const ParsedAction& parsed,
                      const std::map<std::string, Value>& structured_outputs) override {
        (void)parsed;
        for (const auto& [k, v] : structured_outputs) state_[k] = v;
    }

    std::map<std::string, Value> get_contextual_params(
        const std::string&, const std::set<std::string>& missing_params,
        const std::vector<ParamSpec>&) override {
        std::map<std::string, Value> out;
        for (const auto& name : missing_params) {
            auto it = state_.find(name);
            if (it != state_.end()) out[name] = it->second;
        }
        return out;
    }

    std::string generate_action_from_params(const std::string& action_type,
                                            const std::map<std::string, Value>& params) override {
        return format_canonical_action(action_type, params);
    }

private:
    Trajectory recorded_;
    std::size_t cursor_ = 0;
    std::map<std::string, Value> state_;
};

} // namespace autotool
