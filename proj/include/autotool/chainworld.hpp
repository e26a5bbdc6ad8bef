#pragma once
// ChainWorld: a desk-scale synthetic environment with planted successor
// skew. Each task is a chain of tool calls drawn from a transition table
// whose dominant successor fires with probability rho; each step's input
// must carry the previous step's output token.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "adapter.hpp"
#include "environment.hpp"
#include "errors.hpp"
#include "tig.hpp"

namespace autotool {

struct ChainWorldConfig {
    int num_tools = 12;
    double rho = 0.887;  // dominant-successor probability
    int goal_length = 10;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a * 0x9e3779b97f4a7c15ULL + b + 0x7f4a7c159e3779b9ULL;
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

} // namespace detail

class ChainWorld final : public Environment {
public:
    static constexpr const char* kCheckTool = "check_valid_actions";

    explicit ChainWorld(ChainWorldConfig config = {}) : config_(config) {
        if (config_.num_tools < 2) throw ArgumentError("ChainWorld needs at least 2 tools");
        if (config_.rho < 0.0 || config_.rho > 1.0) throw ArgumentError("rho must be in [0,1]");
        if (config_.goal_length < 2) throw ArgumentError("goal_length must be >= 2");
        for (int i = 0; i < config_.num_tools; ++i) tools_.push_back(tool_name(i));
    }

    std::string reset(int task_id) override {
        // Task goal sequence: a walk on the planted transition table.
        std::mt19937_64 rng(detail::mix_seed(config_.seed, static_cast<std::uint64_t>(task_id)));
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        goal_sequence_.clear();
        int cur = task_id % config_.num_tools;
        goal_sequence_.push_back(tools_[cur]);
        while (static_cast<int>(goal_sequence_.size()) < config_.goal_length) {
            int next;
            if (coin(rng) < config_.rho) {
                next = (cur + 1) % config_.num_tools; // dominant successor
            } else {
                std::uniform_int_distribution<int> other(0, config_.num_tools - 2);
                next = other(rng);
                if (next >= (cur + 1) % config_.num_tools) ++next;
            }
            goal_sequence_.push_back(tools_[next]);
            cur = next;
        }
        progress_idx_ = 0;
        last_token_ = "start";
        task_id_ = task_id;
        return "start";
    }

    StepResult step(const std::string& action_text) override {
        auto parsed = parse_canonical_action(action_text);
        if (!parsed) return fail();
        if (parsed->tool_name == kCheckTool) {
            std::string obs = "valid actions:";
            for (const auto& a : valid_actions()) obs += " " + a;
            return {obs, StepStatus::success, progress(), false};
        }
        if (progress_idx_ >= static_cast<int>(goal_sequence_.size())) return fail();
        if (parsed->tool_name != goal_sequence_[progress_idx_]) return fail();
        auto target = parsed->inputs.find("target");
        if (target == parsed->inputs.end() ||
            !values_equal(target->second, Value{last_token_}))
            return fail();

        last_token_ = "item_" + parsed->tool_name + "_" + std::to_string(progress_idx_);
        ++progress_idx_;
        const bool done = progress_idx_ == static_cast<int>(goal_sequence_.size());
        return {"ok result=" + last_token_, StepStatus::success, progress(), done};
    }

    std::vector<ToolSpec> tool_specs() const override {
        std::vector<ToolSpec> specs;
        for (const auto& name : tools_) {
            specs.push_back({name,
                             "apply operation " + name + " to the current item",
                             {{"target", "string", true, "target item for " + name}},
                             {{"result", "string", false, "item produced by " + name}}});
        }
        specs.push_back({kCheckTool, "list the currently valid actions", {}, {}});
        return specs;
    }

    std::vector<std::string> valid_actions() const override {
        std::vector<std::string> out;
        for (const auto& name : tools_) out.push_back(name + "(target=?)");
        out.push_back(std::string(kCheckTool) + "()");
        return out;
    }

    std::string listing_action() const override { return std::string(kCheckTool) + "()"; }

    std::string task_goal() const override {
        std::string goal = "run the operation chain";
        for (const auto& t : goal_sequence_) goal += " " + t;
        return goal;
    }

    double progress() const {
        return static_cast<double>(progress_idx_) / static_cast<double>(goal_sequence_.size());
    }

    // introspection for the scripted oracle
    const std::vector<std::string>& goal_sequence() const { return goal_sequence_; }
    int progress_index() const { return progress_idx_; }
    const std::string& expected_target() const { return last_token_; }
    std::optional<std::string> expected_tool() const {
        if (progress_idx_ >= static_cast<int>(goal_sequence_.size())) return std::nullopt;
        return goal_sequence_[progress_idx_];
    }
    const std::vector<std::string>& tool_names() const { return tools_; }
    int task_id() const { return task_id_; }

private:
    static std::string tool_name(int i) {
        std::string name = "op_";
        if (i < 26) name += static_cast<char>('a' + i);
        else name += "x" + std::to_string(i);
        return name;
    }

    StepResult fail() const { return {"nothing happens", StepStatus::failure, progress(), false}; }

    ChainWorldConfig config_;
    std::vector<std::string> tools_;
    std::vector<std::string> goal_sequence_;
    int progress_idx_ = 0;
    int task_id_ = 0;
    std::string last_token_ = "start";
};

/// Scripted stand-in for the LLM: knows the planted sequence but emits a
/// wrong action at the configured noise rate, so trajectories are imperfect.
class ChainWorldOracle final : public OraclePolicy {
public:
    ChainWorldOracle(const ChainWorld& env, double noise = 0.1) : env_(env), noise_(noise) {
        if (noise < 0.0 || noise > 1.0) throw ArgumentError("noise must be in [0,1]");
    }

    void reset_episode(std::uint64_t seed) override { rng_.seed(seed); }

    OracleDecision decide(const std::string& observation, const std::string& task_goal,
                          const Trajectory& history) override {
        (void)observation;
        (void)task_goal;
        OracleDecision d;
        d.tokens_in = 256 + 8 * static_cast<int>(history.invocations.size());
        d.tokens_out = 24;
        const auto expected = env_.expected_tool();
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (!expected) {
            d.action_text = env_.listing_action();
            return d;
        }
        std::string tool = *expected;
        if (coin(rng_) < noise_) {
            // wrong tool, keeps the episode noisy the way real traces are
            const auto& names = env_.tool_names();
            std::uniform_int_distribution<int> pick(0, static_cast<int>(names.size()) - 1);
            tool = names[pick(rng_)];
            if (tool == *expected) tool = names[(pick(rng_) + 1) % names.size()];
        }
        d.action_text = format_canonical_action(tool, {{"target", Value{env_.expected_target()}}});
        return d;
    }

private:
    const ChainWorld& env_;
    double noise_;
    std::mt19937_64 rng_{0};
};

/// Adapter for ChainWorld's canonical action format; tracks the last
/// produced item so tier-2 filling can supply `target`.
class ChainWorldAdapter final : public EnvironmentAdapter {
public:
    void reset(const std::string& initial_observation) override {
        (void)initial_observation;
        state_.clear();
        state_["result"] = Value{std::string("start")};
    }

    std::optional<ParsedAction> parse_action(const std::string& action_text,
                                             const std::vector<ToolSpec>&) override {
        return parse_canonical_action(action_text);
    }

    std::map<std::string, Value> infer_output(const std::string& tool_name,
                                              const std::map<std::string, Value>& inputs,
                                              const std::string& raw_result) override {
        (void)tool_name;
        (void)inputs;
        std::map<std::string, Value> out;
        const auto pos = raw_result.find("result=");
        if (pos != std::string::npos) {
            std::string token = raw_result.substr(pos + 7);
            const auto space = token.find(' ');
            if (space != std::string::npos) token = token.substr(0, space);
            out["result"] = Value{token};
        }
        return out;
    }

    void update_state(const ParsedAction&,
                      const std::map<std::string, Value>& structured_outputs) override {
        for (const auto& [k, v] : structured_outputs) state_[k] = v;
    }

    std::map<std::string, Value> get_contextual_params(
        const std::string&, const std::set<std::string>& missing_params,
        const std::vector<ParamSpec>&) override {
        std::map<std::string, Value> out;
        if (missing_params.count("target")) {
            auto it = state_.find("result");
            if (it != state_.end()) out["target"] = it->second;
        }
        return out;
    }

    std::string generate_action_from_params(const std::string& action_type,
                                            const std::map<std::string, Value>& params) override {
        return format_canonical_action(action_type, params);
    }

private:
    std::map<std::string, Value> state_;
};

} // namespace autotool
