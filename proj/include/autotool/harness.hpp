#pragma once
// Episode runner: wires an oracle policy, an environment, and the inertial
// fast path together, with online graph updates, the recovery path, an
// n-gram baseline fast path, and speedup benchmarking.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adapter.hpp"
#include "chainworld.hpp"
#include "environment.hpp"
#include "errors.hpp"
#include "param_filler.hpp"
#include "predictor.hpp"
#include "relevance.hpp"
#include "tig.hpp"
#include "trajectory.hpp"

namespace autotool {

enum class HarnessMode { baseline, autotool, ngram };

inline const char* to_string(HarnessMode m) {
    switch (m) {
        case HarnessMode::baseline: return "baseline";
        case HarnessMode::autotool: return "autotool";
        default: return "ngram";
    }
}

struct StepProvenance {
    std::string tool;
    std::string source; // "oracle", "inertial", or "recovery"
    StepStatus status = StepStatus::success;
};

/// Per-episode accounting. Recovery actions are tallied separately and are
/// excluded from `steps`, so oracle_calls + inertial_calls == steps holds.
struct EpisodeMetrics {
    int oracle_calls = 0;
    int inertial_calls = 0;
    int inertial_attempts = 0;
    int recovery_calls = 0;
    std::map<std::string, int> fallbacks;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    int steps = 0;
    double final_progress = 0.0;
    bool aborted = false;
    std::string abort_diagnostic;
    std::vector<StepProvenance> trace;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["oracle_calls"] = oracle_calls;
        j["inertial_calls"] = inertial_calls;
        j["inertial_attempts"] = inertial_attempts;
        j["recovery_calls"] = recovery_calls;
        j["fallbacks"] = fallbacks;
        j["tokens_in"] = tokens_in;
        j["tokens_out"] = tokens_out;
        j["steps"] = steps;
        j["final_progress"] = final_progress;
        nlohmann::json tr = nlohmann::json::array();
        for (const auto& s : trace)
            tr.push_back({{"tool", s.tool}, {"source", s.source}, {"status", to_string(s.status)}});
        j["trace"] = tr;
        return j;
    }
};

/// Maximum-likelihood successor counts for the n-gram baseline; no ICF, no
/// contextual score, raw argmax with lexicographic tie-break.
class NgramModel {
public:
    explicit NgramModel(int n = 3) : n_(n) {
        if (n < 1) throw ArgumentError("n must be >= 1");
    }

    int order() const { return n_; }

    void observe(const std::vector<std::string>& context, const std::string& next) {
        ++counts_[context][next];
    }

    std::optional<std::string> predict(const std::vector<std::string>& context) const {
        auto it = counts_.find(context);
        if (it == counts_.end()) return std::nullopt;
        std::optional<std::string> best;
        std::int64_t best_count = 0;
        for (const auto& [tool, c] : it->second) {
            if (c > best_count || (c == best_count && best && tool < *best)) {
                best = tool;
                best_count = c;
            }
        }
        return best;
    }

private:
    int n_;
    std::map<std::vector<std::string>, std::map<std::string, std::int64_t>> counts_;
};

/// Mutable state shared by consecutive episodes of one run: the graph warms
/// up online across tasks.
struct FastPathRuntime {
    HarnessMode mode = HarnessMode::baseline;
    ToolInertiaGraph* graph = nullptr;
    EnvironmentAdapter* adapter = nullptr;
    const RelevanceScorer* scorer = nullptr;
    PredictorConfig config;
    bool enable_recovery = false;
    NgramModel ngram{3};
};

/// Returns the recovery action when the last two executed actions failed.
inline std::optional<std::string> recovery_check(const std::vector<StepStatus>& executed_statuses,
                                                 bool enabled,
                                                 const std::string& listing_action) {
    if (!enabled) return std::nullopt;
    const auto n = executed_statuses.size();
    if (n < 2) return std::nullopt;
    if (executed_statuses[n - 1] == StepStatus::failure &&
        executed_statuses[n - 2] == StepStatus::failure)
        return listing_action;
    return std::nullopt;
}

inline std::pair<EpisodeMetrics, Trajectory> run_episode(Environment& env, OraclePolicy& policy,
                                                         FastPathRuntime* fast, std::uint64_t seed,
                                                         int task_id, int max_steps = 64) {
    EpisodeMetrics metrics;
    Trajectory trajectory;
    trajectory.id = "task_" + std::to_string(task_id) + "_seed_" + std::to_string(seed);

    std::string observation = env.reset(task_id);
    trajectory.task_goal = env.task_goal();
    policy.reset_episode(seed);

    const auto tool_specs = env.tool_specs();
    EnvironmentAdapter* adapter = fast ? fast->adapter : nullptr;
    UsedValueRecord used(seed);
    if (adapter) adapter->reset(observation);
    if (fast && fast->mode != HarnessMode::baseline) {
        for (const auto& spec : tool_specs) fast->graph->register_tool(spec);
    }

    std::vector<StepStatus> executed_statuses;
    std::vector<std::string> tool_history; // executed decision steps only
    bool last_was_inertial = false;
    int segment_start = 0;
    int executed = 0;

    try {
        while (executed < max_steps) {
            ++executed;

            // recovery path preempts both the inertial and the oracle path
            if (fast && fast->mode != HarnessMode::baseline) {
                auto recovery = recovery_check(executed_statuses, fast->enable_recovery,
                                               env.listing_action());
                if (recovery) {
                    auto result = env.step(*recovery);
                    ++metrics.recovery_calls;
                    metrics.final_progress = result.progress;
                    executed_statuses.push_back(result.status);
                    metrics.trace.push_back({ChainWorld::kCheckTool, "recovery", result.status});
                    observation = result.observation;
                    last_was_inertial = false;
                    if (result.done) break;
                    continue;
                }
            }

            bool inertial_executed = false;
            std::string action_text;
            std::optional<std::string> predicted_tool;
            std::map<std::string, Value> predicted_inputs;
            std::vector<std::string> window_used;

            if (fast && fast->mode != HarnessMode::baseline && !tool_history.empty()) {
                PredictionResult prediction;
                if (fast->mode == HarnessMode::autotool) {
                    const std::string intuition = trajectory.task_goal + " " + observation;
                    prediction = predict_next_tool(*fast->graph, tool_history, intuition,
                                                   *fast->scorer, fast->config);
                    const std::size_t k =
                        std::min<std::size_t>(fast->config.window, tool_history.size());
                    window_used.assign(tool_history.end() - k, tool_history.end());
                } else {
                    // n-gram: raw ML successor of the last n-1 tools
                    const std::size_t k =
                        std::min<std::size_t>(fast->ngram.order() - 1, tool_history.size());
                    if (k >= 1) {
                        window_used.assign(tool_history.end() - k, tool_history.end());
                        if (auto tool = fast->ngram.predict(window_used)) {
                            prediction.tool = tool;
                            prediction.cips = 1.0; // no score; gate on budget rules only
                        }
                    }
                }
                GateStats stats{metrics.steps, metrics.inertial_calls, last_was_inertial};
                auto decision = gate_inertial_call(prediction, fast->config, stats);
                if (decision.proceed) {
                    ++metrics.inertial_attempts;
                    auto fill = fill_parameters(*fast->graph, *adapter, *prediction.tool,
                                                trajectory, used, trajectory.task_goal);
                    if (fill.complete) {
                        predicted_tool = prediction.tool;
                        predicted_inputs = fill.filled;
                        action_text =
                            adapter->generate_action_from_params(*prediction.tool, fill.filled);
                        inertial_executed = true;
                    } else {
                        ++metrics.fallbacks["param_fill_incomplete"];
                    }
                } else {
                    ++metrics.fallbacks[to_string(decision.reason)];
                }
            }

            OracleDecision oracle;
            if (!inertial_executed) {
                oracle = policy.decide(observation, trajectory.task_goal, trajectory);
                action_text = oracle.action_text;
            }

            auto result = env.step(action_text);
            metrics.final_progress = result.progress;

            ToolInvocation inv;
            inv.step_index = static_cast<int>(trajectory.invocations.size());
            inv.raw_text = action_text;
            inv.status = result.status;
            inv.source = inertial_executed ? StepSource::inertial : StepSource::oracle;
            std::optional<ParsedAction> parsed =
                adapter ? adapter->parse_action(action_text, tool_specs)
                        : parse_canonical_action(action_text);
            if (parsed) {
                inv.tool_name = parsed->tool_name;
                inv.inputs = parsed->inputs;
            } else {
                inv.tool_name = "<unparsed>";
            }
            if (adapter && parsed && result.status == StepStatus::success) {
                inv.outputs = adapter->infer_output(inv.tool_name, inv.inputs, result.observation);
                adapter->update_state(*parsed, inv.outputs);
            }
            trajectory.observations.push_back(observation);
            trajectory.invocations.push_back(inv);

            if (inertial_executed) {
                ++metrics.inertial_calls;
                metrics.trace.push_back({inv.tool_name, "inertial", result.status});
                // memory note explaining why the oracle was skipped
                trajectory.metadata["thought_" + std::to_string(inv.step_index)] =
                    "Think: Using graph inertia to predict next action " + *predicted_tool +
                    " with parameters " + format_canonical_action("", predicted_inputs) +
                    ".\nAction: " + action_text;
            } else {
                ++metrics.oracle_calls;
                metrics.tokens_in += oracle.tokens_in;
                metrics.tokens_out += oracle.tokens_out;
                metrics.trace.push_back({inv.tool_name, "oracle", result.status});
            }
            ++metrics.steps;

            // online graph learning
            if (fast && fast->mode != HarnessMode::baseline && parsed &&
                fast->graph->has_tool(inv.tool_name)) {
                const int step = inv.step_index;
                fast->graph->record_online_step(trajectory, step, segment_start,
                                                fast->config.window);
                const bool reinforcing =
                    inv.status == StepStatus::success && inv.source == StepSource::oracle;
                if (!reinforcing) segment_start = step + 1;

                if (inertial_executed) {
                    std::vector<std::string> seq = window_used;
                    seq.push_back(inv.tool_name);
                    if (auto path_id = fast->graph->find_path_id(seq))
                        fast->graph->update_path_efficacy(*path_id, result.status);
                    if (result.status == StepStatus::failure &&
                        static_cast<int>(seq.size()) > fast->config.window)
                        fast->graph->record_failure_path(seq, fast->config.window);
                }
                if (fast->mode == HarnessMode::ngram && !inertial_executed &&
                    result.status == StepStatus::success) {
                    const int k = fast->ngram.order() - 1;
                    if (static_cast<int>(tool_history.size()) >= k && k >= 1) {
                        std::vector<std::string> ctx(tool_history.end() - k, tool_history.end());
                        fast->ngram.observe(ctx, inv.tool_name);
                    }
                }
            }

            executed_statuses.push_back(result.status);
            tool_history.push_back(inv.tool_name);
            last_was_inertial = inertial_executed;
            observation = result.observation;
            if (result.done) break;
        }
    } catch (const std::exception& e) {
        metrics.aborted = true;
        metrics.abort_diagnostic = e.what();
    }
    return {metrics, trajectory};
}

/// Independent post-hoc check of the gate invariants over an emitted trace:
/// inertial fraction <= cap at every prefix and no consecutive inertials.
inline bool validate_trace(const EpisodeMetrics& metrics, const PredictorConfig& config,
                           std::string* why = nullptr) {
    int decisions = 0;
    int inertial = 0;
    bool prev_inertial = false;
    for (const auto& s : metrics.trace) {
        if (s.source == "recovery") continue;
        ++decisions;
        if (s.source == "inertial") {
            ++inertial;
            if (prev_inertial) {
                if (why) *why = "consecutive inertial actions";
                return false;
            }
            prev_inertial = true;
        } else {
            prev_inertial = false;
        }
        if (static_cast<double>(inertial) >
            config.inertial_cap * static_cast<double>(decisions) + 1e-12) {
            if (why)
                *why = "inertial fraction " + std::to_string(inertial) + "/" +
                       std::to_string(decisions) + " exceeds cap";
            return false;
        }
    }
    return true;
}

struct VariantSpec {
    std::string name;
    HarnessMode mode = HarnessMode::baseline;
    bool recovery = false;
};

struct VariantResult {
    VariantSpec spec;
    // indexed [seed][episode]
    std::vector<std::vector<EpisodeMetrics>> episodes;

    double mean_of(const std::function<double(const EpisodeMetrics&)>& f) const {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& per_seed : episodes)
            for (const auto& m : per_seed) {
                sum += f(m);
                ++n;
            }
        return n ? sum / static_cast<double>(n) : 0.0;
    }

    double mean_progress() const {
        return mean_of([](const EpisodeMetrics& m) { return m.final_progress; });
    }
    double mean_oracle_calls() const {
        return mean_of([](const EpisodeMetrics& m) { return m.oracle_calls; });
    }
    double mean_tokens_in() const {
        return mean_of([](const EpisodeMetrics& m) { return static_cast<double>(m.tokens_in); });
    }
    double mean_tokens_out() const {
        return mean_of([](const EpisodeMetrics& m) { return static_cast<double>(m.tokens_out); });
    }
    double mean_inertial_calls() const {
        return mean_of([](const EpisodeMetrics& m) { return m.inertial_calls; });
    }
};

struct ComparisonReport {
    std::vector<VariantResult> variants;

    const VariantResult* find(const std::string& name) const {
        for (const auto& v : variants)
            if (v.spec.name == name) return &v;
        return nullptr;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["variants"] = nlohmann::json::array();
        const VariantResult* baseline = find("baseline");
        for (const auto& v : variants) {
            nlohmann::json vj;
            vj["name"] = v.spec.name;
            vj["mode"] = to_string(v.spec.mode);
            vj["recovery"] = v.spec.recovery;
            vj["mean"] = {{"progress", v.mean_progress()},
                          {"oracle_calls", v.mean_oracle_calls()},
                          {"tokens_in", v.mean_tokens_in()},
                          {"tokens_out", v.mean_tokens_out()},
                          {"inertial_calls", v.mean_inertial_calls()}};
            if (baseline && baseline != &v) {
                auto ratio = [](double base, double val) { return val > 0.0 ? base / val : 0.0; };
                vj["speedup"] = {
                    {"llmc", ratio(baseline->mean_oracle_calls(), v.mean_oracle_calls())},
                    {"tok_in", ratio(baseline->mean_tokens_in(), v.mean_tokens_in())},
                    {"tok_out", ratio(baseline->mean_tokens_out(), v.mean_tokens_out())}};
            }
            // learning curve: per-episode means across seeds
            nlohmann::json curve = nlohmann::json::array();
            if (!v.episodes.empty()) {
                const std::size_t n_eps = v.episodes.front().size();
                for (std::size_t e = 0; e < n_eps; ++e) {
                    double oc = 0.0, ic = 0.0, pr = 0.0;
                    for (const auto& per_seed : v.episodes) {
                        oc += per_seed[e].oracle_calls;
                        ic += per_seed[e].inertial_calls;
                        pr += per_seed[e].final_progress;
                    }
                    const double s = static_cast<double>(v.episodes.size());
                    curve.push_back({{"episode", e},
                                     {"oracle_calls", oc / s},
                                     {"inertial_calls", ic / s},
                                     {"progress", pr / s}});
                }
            }
            vj["learning_curve"] = curve;
            j["variants"].push_back(std::move(vj));
        }
        return j;
    }

    std::string to_text_table() const {
        std::ostringstream os;
        os << "variant           PR      tok-in     tok-out   LLMC    inertial\n";
        for (const auto& v : variants) {
            char line[160];
            std::snprintf(line, sizeof(line), "%-16s %6.3f %10.1f %10.1f %7.2f %8.2f\n",
                          v.spec.name.c_str(), v.mean_progress(), v.mean_tokens_in(),
                          v.mean_tokens_out(), v.mean_oracle_calls(), v.mean_inertial_calls());
            os << line;
        }
        return os.str();
    }
};

struct BenchmarkConfig {
    ChainWorldConfig env;
    PredictorConfig predictor;
    double oracle_noise = 0.1;
    int episodes = 40;
    std::vector<std::uint64_t> seeds = {1};
    int max_steps = 64;
};

/// Run each variant over (seed, episode) cells. Episodes within a seed share
/// one online graph; cells across seeds and variants are independent.
inline ComparisonReport benchmark(const BenchmarkConfig& config,
                                  const std::vector<VariantSpec>& variants) {
    if (config.episodes < 1) throw ArgumentError("need at least one episode");
    if (config.seeds.empty()) throw ArgumentError("need at least one seed");
    ComparisonReport report;
    for (const auto& spec : variants) {
        VariantResult result;
        result.spec = spec;
        for (std::uint64_t seed : config.seeds) {
            ChainWorldConfig env_cfg = config.env;
            env_cfg.seed = seed;
            ChainWorld env(env_cfg);
            ChainWorldOracle oracle(env, config.oracle_noise);
            ToolInertiaGraph graph;
            ChainWorldAdapter adapter;
            LexicalCosineScorer scorer;
            FastPathRuntime runtime;
            runtime.mode = spec.mode;
            runtime.graph = &graph;
            runtime.adapter = &adapter;
            runtime.scorer = &scorer;
            runtime.config = config.predictor;
            runtime.enable_recovery = spec.recovery;
            FastPathRuntime* fast = spec.mode == HarnessMode::baseline ? nullptr : &runtime;

            std::vector<EpisodeMetrics> per_seed;
            for (int e = 0; e < config.episodes; ++e) {
                auto [metrics, trajectory] =
                    run_episode(env, oracle, fast, detail::mix_seed(seed, e), e, config.max_steps);
                (void)trajectory;
                per_seed.push_back(std::move(metrics));
            }
            result.episodes.push_back(std::move(per_seed));
        }
        report.variants.push_back(std::move(result));
    }
    return report;
}

} // namespace autotool
