#pragma once
// Environment and oracle-policy interfaces wired together by the harness.
// The oracle stands in for the expensive decision-maker; token fields model
// its per-call cost.

#include <cstdint>
#include <string>
#include <vector>

#include "tig.hpp"
#include "trajectory.hpp"

namespace autotool {

struct StepResult {
    std::string observation;
    StepStatus status = StepStatus::success;
    double progress = 0.0;
    bool done = false;
};

class Environment {
public:
    virtual ~Environment() = default;
    virtual std::string reset(int task_id) = 0; // returns initial observation
    virtual StepResult step(const std::string& action_text) = 0;
    virtual std::vector<ToolSpec> tool_specs() const = 0;
    virtual std::vector<std::string> valid_actions() const = 0;
    /// Action text that lists valid actions; the preconfigured recovery path.
    virtual std::string listing_action() const = 0;
    virtual std::string task_goal() const = 0;
};

struct OracleDecision {
    std::string action_text;
    int tokens_in = 0;
    int tokens_out = 0;
};

class OraclePolicy {
public:
    virtual ~OraclePolicy() = default;
    virtual void reset_episode(std::uint64_t seed) = 0;
    virtual OracleDecision decide(const std::string& observation, const std::string& task_goal,
                                  const Trajectory& history) = 0;
};

} // namespace autotool
