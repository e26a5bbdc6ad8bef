#pragma once
// Hierarchical non-oracle parameter filling: dependency-graph backtracking,
// then environment state, then a weak goal-overlap heuristic. Already-filled
// keys are never overwritten; the inertial call is aborted by the caller when
// any required parameter is still missing.

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "adapter.hpp"
#include "errors.hpp"
#include "relevance.hpp"
#include "tig.hpp"
#include "value.hpp"

namespace autotool {

enum class FillProvenance { dependency_graph, environment, heuristic };

inline const char* to_string(FillProvenance p) {
    switch (p) {
        case FillProvenance::dependency_graph: return "dependency_graph";
        case FillProvenance::environment: return "environment";
        default: return "heuristic";
    }
}

struct FillResult {
    std::map<std::string, Value> filled;
    std::map<std::string, FillProvenance> provenance;
    bool complete = false;
};

/// Values already consumed for filling within the current task, plus the
/// seeded RNG used for list-element selection. Cleared on task reset.
struct UsedValueRecord {
    std::set<std::string> used;
    std::mt19937_64 rng{0};

    explicit UsedValueRecord(std::uint64_t seed = 0) : rng(seed) {}

    void reset(std::uint64_t seed) {
        used.clear();
        rng.seed(seed);
    }

    bool contains(const Value& v) const { return used.count(value_key(v)) != 0; }
    void mark(const Value& v) { used.insert(value_key(v)); }
};

/// Uniform choice among not-yet-used elements; the chosen value is marked
/// used. Absent when every element has already been consumed.
inline std::optional<Value> select_from_list(const std::vector<std::string>& values,
                                             UsedValueRecord& used) {
    std::vector<std::string> fresh;
    for (const auto& v : values)
        if (!used.contains(Value{v})) fresh.push_back(v);
    if (fresh.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, fresh.size() - 1);
    Value chosen = fresh[pick(used.rng)];
    used.mark(chosen);
    return chosen;
}

namespace detail {

/// Latest history step where `tool` ran, or -1.
inline int latest_step_of_tool(const Trajectory& history, const std::string& tool) {
    for (int i = static_cast<int>(history.invocations.size()) - 1; i >= 0; --i)
        if (history.invocations[i].tool_name == tool) return i;
    return -1;
}

inline std::optional<Value> lookup_history_value(const Trajectory& history, int step,
                                                 const std::string& param, ParamDirection dir) {
    const auto& inv = history.invocations[step];
    const auto& params = dir == ParamDirection::output ? inv.outputs : inv.inputs;
    auto it = params.find(param);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

} // namespace detail

/// Tier 1: resolve inputs through learned parameter-dependency edges.
/// Highest edge count wins; ties go to the source whose tool ran most
/// recently in history. Sources whose tool never ran are skipped.
inline std::map<std::string, Value> fill_from_dependency_graph(const ToolInertiaGraph& graph,
                                                               const std::string& target_tool,
                                                               const Trajectory& history,
                                                               UsedValueRecord& used) {
    const auto& node = graph.tool(target_tool);
    std::map<std::string, Value> filled;
    auto edges_for_tool = graph.param_edges().find(target_tool);
    if (edges_for_tool == graph.param_edges().end()) return filled;

    for (const auto& spec : node.spec.args) {
        auto by_src = edges_for_tool->second.find(spec.name);
        if (by_src == edges_for_tool->second.end()) continue;

        // rank sources: count desc, then recency in history desc, then key
        struct RankedSource {
            ParamEdgeKey key;
            std::int64_t count;
            int last_step;
        };
        std::vector<RankedSource> sources;
        for (const auto& [key, edge] : by_src->second)
            sources.push_back({key, edge.count, detail::latest_step_of_tool(history, key.src_tool)});
        std::sort(sources.begin(), sources.end(), [](const RankedSource& a, const RankedSource& b) {
            if (a.count != b.count) return a.count > b.count;
            if (a.last_step != b.last_step) return a.last_step > b.last_step;
            return a.key < b.key;
        });

        for (const auto& src : sources) {
            if (src.last_step < 0) continue; // source tool never ran this episode
            auto value = detail::lookup_history_value(history, src.last_step, src.key.src_param,
                                                      src.key.src_dir);
            if (!value) continue;
            if (std::holds_alternative<std::vector<std::string>>(*value)) {
                auto chosen = select_from_list(std::get<std::vector<std::string>>(*value), used);
                if (!chosen) continue;
                value = chosen;
            }
            auto coerced = coerce_to_tag(*value, spec.type_tag);
            if (!coerced) continue; // type-incompatible
            filled[spec.name] = *coerced;
            break;
        }
    }
    return filled;
}

/// Tier 2: ask the adapter, keeping only keys that are actually missing.
inline std::map<std::string, Value> fill_from_environment(EnvironmentAdapter& adapter,
                                                          const std::string& target_tool,
                                                          const std::set<std::string>& missing,
                                                          const std::vector<ParamSpec>& specs) {
    if (missing.empty()) return {};
    std::map<std::string, Value> out;
    try {
        auto proposed = adapter.get_contextual_params(target_tool, missing, specs);
        for (const auto& [k, v] : proposed)
            if (missing.count(k)) out[k] = v;
    } catch (const std::exception& e) {
        throw AdapterError(std::string("adapter get_contextual_params failed: ") + e.what());
    }
    return out;
}

/// Tier 3: goal-overlap heuristic. A parameter whose description shares a
/// token with the task goal is filled with the longest contiguous span of
/// goal tokens that are neither stopwords nor description tokens; equal
/// spans break to the earlier goal position.
inline std::map<std::string, Value> fill_heuristic(const std::string& task_goal,
                                                   const std::string& current_state_summary,
                                                   const std::string& target_tool,
                                                   const std::set<std::string>& missing,
                                                   const std::vector<ParamSpec>& specs) {
    (void)current_state_summary;
    (void)target_tool;
    static const std::set<std::string> kStopwords = {"a",  "an",  "the", "on",   "in",  "to",
                                                     "of", "for", "with", "at",  "from", "into",
                                                     "and", "or", "is",  "are"};
    const auto goal_tokens = tokenize_lower(task_goal);
    std::map<std::string, Value> out;
    for (const auto& spec : specs) {
        if (!missing.count(spec.name)) continue;
        const auto desc_tokens_vec = tokenize_lower(spec.description);
        const std::set<std::string> desc_tokens(desc_tokens_vec.begin(), desc_tokens_vec.end());
        bool overlaps = false;
        for (const auto& t : goal_tokens)
            if (desc_tokens.count(t)) {
                overlaps = true;
                break;
            }
        if (!overlaps) continue;

        // longest span of goal content tokens outside the description
        std::size_t best_start = 0, best_len = 0, cur_start = 0, cur_len = 0;
        for (std::size_t i = 0; i <= goal_tokens.size(); ++i) {
            const bool content = i < goal_tokens.size() && !kStopwords.count(goal_tokens[i]) &&
                                 !desc_tokens.count(goal_tokens[i]);
            if (content) {
                if (cur_len == 0) cur_start = i;
                ++cur_len;
            } else {
                if (cur_len > best_len) { // strict: earlier equal-length span wins
                    best_len = cur_len;
                    best_start = cur_start;
                }
                cur_len = 0;
            }
        }
        if (best_len == 0) continue;
        std::string phrase;
        for (std::size_t i = best_start; i < best_start + best_len; ++i) {
            if (!phrase.empty()) phrase += " ";
            phrase += goal_tokens[i];
        }
        out[spec.name] = phrase;
    }
    return out;
}

/// Apply the three tiers in strict priority order; complete only when every
/// required parameter is filled.
inline FillResult fill_parameters(const ToolInertiaGraph& graph, EnvironmentAdapter& adapter,
                                  const std::string& target_tool, const Trajectory& history,
                                  UsedValueRecord& used, const std::string& task_goal = "") {
    const auto& node = graph.tool(target_tool);
    FillResult result;

    auto absorb = [&](const std::map<std::string, Value>& tier, FillProvenance provenance) {
        for (const auto& [k, v] : tier) {
            if (result.filled.count(k)) continue; // never overwrite
            result.filled[k] = v;
            result.provenance[k] = provenance;
        }
    };
    auto missing_params = [&]() {
        std::set<std::string> missing;
        for (const auto& spec : node.spec.args)
            if (!result.filled.count(spec.name)) missing.insert(spec.name);
        return missing;
    };

    absorb(fill_from_dependency_graph(graph, target_tool, history, used),
           FillProvenance::dependency_graph);
    if (auto missing = missing_params(); !missing.empty())
        absorb(fill_from_environment(adapter, target_tool, missing, node.spec.args),
               FillProvenance::environment);
    if (auto missing = missing_params(); !missing.empty())
        absorb(fill_heuristic(task_goal.empty() ? history.task_goal : task_goal, "", target_tool,
                              missing, node.spec.args),
               FillProvenance::heuristic);

    result.complete = true;
    for (const auto& spec : node.spec.args)
        if (spec.required && !result.filled.count(spec.name)) result.complete = false;
    return result;
}

} // namespace autotool
