#pragma once
// Inertial next-tool prediction: candidate generation from stored tool
// paths, confidence damping (ICF), per-candidate confidence (ICS), CIPS
// aggregation, and the gate that decides whether an inertial call may run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "relevance.hpp"
#include "tig.hpp"

namespace autotool {

struct PredictorConfig {
    int window = 2;                 // inertia window k
    double theta_inertial = 0.1;    // CIPS trigger threshold
    double alpha = 0.5;             // contextual relevance weight
    double icf_base = 1.1;          // base of the confidence damping exponential
    double inertial_cap = 0.30;     // max fraction of inertial actions
    bool forbid_consecutive = true;

    void validate() const {
        if (window < 1) throw ArgumentError("window must be >= 1");
        if (theta_inertial < 0.0 || theta_inertial > 1.0)
            throw ArgumentError("theta_inertial must be in [0,1]");
        if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must be in [0,1]");
        if (icf_base <= 1.0) throw ArgumentError("icf_base must be > 1");
        if (inertial_cap < 0.0 || inertial_cap > 1.0)
            throw ArgumentError("inertial_cap must be in [0,1]");
    }
};

struct Candidate {
    std::string tool;
    std::int64_t weight = 0;
};

struct PredictionResult {
    std::optional<std::string> tool;
    double score_freq = 0.0;
    double score_ctx = 0.0;
    double cips = 0.0;
    double w_total = 0.0;
    double icf = 0.0;
    std::vector<std::pair<std::string, double>> candidates; // (tool, cips) audit trail
};

/// Aggregate successor weights over every contiguous occurrence of the
/// window in every stored path. Tools whose net weight is non-positive are
/// suppressed and never reach the confidence denominator.
inline std::pair<std::vector<Candidate>, std::int64_t> candidate_successors(
    const ToolInertiaGraph& graph, const std::vector<std::string>& window_tools) {
    if (window_tools.empty()) return {{}, 0};
    std::set<int> ids;
    try {
        ids = graph.find_paths_containing(window_tools);
    } catch (const UnknownToolError&) {
        return {{}, 0};
    }
    std::map<std::string, std::int64_t> weights;
    for (int id : ids) {
        const auto& path = graph.paths()[id];
        for (int pos : ToolInertiaGraph::occurrences(path.tools, window_tools)) {
            const std::size_t next = pos + window_tools.size();
            if (next < path.tools.size()) weights[path.tools[next]] += path.frequency;
        }
    }
    std::vector<Candidate> out;
    std::int64_t total = 0;
    for (const auto& [tool, w] : weights) {
        if (w <= 0) continue;
        out.push_back({tool, w});
        total += w;
    }
    return {out, total};
}

/// ICF = 1 - base^(-W_total): near 0 on sparse evidence, approaches 1 as
/// evidence accumulates.
inline double inertia_confidence_factor(double w_total, double icf_base) {
    if (icf_base <= 1.0) throw ArgumentError("icf_base must be > 1");
    if (w_total < 0.0) throw ArgumentError("w_total must be >= 0");
    return 1.0 - std::pow(icf_base, -w_total);
}

/// ICS = (w_j / W_total) * ICF; used as the frequency score in CIPS.
inline double inertia_confidence_score(double w_j, double w_total, double icf) {
    if (w_total <= 0.0) throw ArgumentError("w_total must be > 0");
    if (w_j <= 0.0 || w_j > w_total) throw ArgumentError("w_j must be in (0, w_total]");
    return (w_j / w_total) * icf;
}

/// CIPS = (1 - alpha) * score_freq + alpha * score_ctx.
inline double cips(double score_freq, double score_ctx, double alpha) {
    if (score_freq < 0.0 || score_freq > 1.0) throw ArgumentError("score_freq must be in [0,1]");
    if (score_ctx < 0.0 || score_ctx > 1.0) throw ArgumentError("score_ctx must be in [0,1]");
    if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must be in [0,1]");
    return (1.0 - alpha) * score_freq + alpha * score_ctx;
}

/// Predict the next tool from the most recent `window` tools. Absence of a
/// prediction is a value (tool = nullopt, cips = 0), not an error. Ties on
/// CIPS break to the lexicographically smaller tool name. With alpha = 0
/// the scorer is never consulted.
inline PredictionResult predict_next_tool(const ToolInertiaGraph& graph,
                                          const std::vector<std::string>& history,
                                          const std::string& intuition,
                                          const RelevanceScorer& scorer,
                                          const PredictorConfig& config) {
    config.validate();
    PredictionResult result;
    if (history.empty()) return result;

    // warm-up: query with whatever history is available, down to length 1
    const std::size_t k = std::min<std::size_t>(config.window, history.size());
    std::vector<std::string> window(history.end() - k, history.end());

    auto [candidates, w_total] = candidate_successors(graph, window);
    if (candidates.empty()) return result;

    result.w_total = static_cast<double>(w_total);
    result.icf = inertia_confidence_factor(result.w_total, config.icf_base);

    for (const auto& c : candidates) {
        const double freq =
            inertia_confidence_score(static_cast<double>(c.weight), result.w_total, result.icf);
        double ctx = 0.0;
        if (config.alpha > 0.0)
            ctx = std::clamp(scorer.score(intuition, graph.tool(c.tool).spec.description), 0.0, 1.0);
        const double score = cips(freq, ctx, config.alpha);
        result.candidates.emplace_back(c.tool, score);
        const bool better = !result.tool || score > result.cips ||
                            (score == result.cips && c.tool < *result.tool);
        if (better) {
            result.tool = c.tool;
            result.score_freq = freq;
            result.score_ctx = ctx;
            result.cips = score;
        }
    }
    return result;
}

enum class FallbackReason {
    none,
    no_candidate,
    below_threshold,
    cap_exceeded,
    consecutive_forbidden,
};

inline const char* to_string(FallbackReason r) {
    switch (r) {
        case FallbackReason::none: return "none";
        case FallbackReason::no_candidate: return "no_candidate";
        case FallbackReason::below_threshold: return "below_threshold";
        case FallbackReason::cap_exceeded: return "cap_exceeded";
        default: return "consecutive_forbidden";
    }
}

struct GateStats {
    int total_actions = 0;
    int inertial_actions = 0;
    bool last_action_was_inertial = false;
};

struct GateDecision {
    bool proceed = false;
    FallbackReason reason = FallbackReason::none;
};

/// Budget gate over a prediction: threshold, per-episode inertial cap
/// (checked on every prefix), and the no-consecutive-inertial rule.
inline GateDecision gate_inertial_call(const PredictionResult& result,
                                       const PredictorConfig& config, const GateStats& stats) {
    if (!result.tool) return {false, FallbackReason::no_candidate};
    if (!(result.cips > config.theta_inertial)) return {false, FallbackReason::below_threshold};
    if (static_cast<double>(stats.inertial_actions + 1) >
        config.inertial_cap * static_cast<double>(stats.total_actions + 1))
        return {false, FallbackReason::cap_exceeded};
    if (config.forbid_consecutive && stats.last_action_was_inertial)
        return {false, FallbackReason::consecutive_forbidden};
    return {true, FallbackReason::none};
}

} // namespace autotool
