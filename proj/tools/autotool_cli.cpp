// autotool: learn tool-usage inertia from agent trajectories, predict next
// tools without the oracle, and analyze corpus inertia with Markov stats.
//
// Exit codes: 0 success, 1 data error (malformed/invalid input files),
// 2 configuration or graph error (bad flags, bad config, unknown tools).

#include <CLI11.hpp>

#include <autotool/autotool.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace autotool;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitConfigError = 2;

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string config_path;
    std::string out_dir = ".";
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "seed for all randomized behavior")
        ->capture_default_str();
    cmd->add_option("--config", opts.config_path,
                    "JSON file with flat predictor keys (window, theta_inertial, alpha, "
                    "icf_base, inertial_cap, forbid_consecutive)");
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
}

// Optional per-key CLI overrides layered over the config file.
struct PredictorFlagOverrides {
    std::optional<int> window;
    std::optional<double> theta_inertial;
    std::optional<double> alpha;
    std::optional<double> icf_base;
    std::optional<double> inertial_cap;
    std::optional<bool> forbid_consecutive;
};

void add_predictor_flags(CLI::App* cmd, PredictorFlagOverrides& o) {
    cmd->add_option("--window", o.window, "inertia window k");
    cmd->add_option("--theta-inertial", o.theta_inertial, "CIPS trigger threshold");
    cmd->add_option("--alpha", o.alpha, "contextual relevance weight");
    cmd->add_option("--icf-base", o.icf_base, "confidence damping base");
    cmd->add_option("--inertial-cap", o.inertial_cap, "max inertial action fraction");
    cmd->add_option("--forbid-consecutive", o.forbid_consecutive,
                    "forbid back-to-back inertial actions");
}

nlohmann::json load_json_file(const std::string& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON in ") + path + ": " + e.what());
    }
}

PredictorConfig resolve_predictor_config(const CommonOpts& common,
                                         const PredictorFlagOverrides& flags) {
    PredictorConfig cfg;
    if (!common.config_path.empty()) {
        const auto j = load_json_file(common.config_path);
        if (!j.is_object()) throw ArgumentError("config file must hold a JSON object");
        cfg.window = j.value("window", cfg.window);
        cfg.theta_inertial = j.value("theta_inertial", cfg.theta_inertial);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.icf_base = j.value("icf_base", cfg.icf_base);
        cfg.inertial_cap = j.value("inertial_cap", cfg.inertial_cap);
        cfg.forbid_consecutive = j.value("forbid_consecutive", cfg.forbid_consecutive);
    }
    if (flags.window) cfg.window = *flags.window;
    if (flags.theta_inertial) cfg.theta_inertial = *flags.theta_inertial;
    if (flags.alpha) cfg.alpha = *flags.alpha;
    if (flags.icf_base) cfg.icf_base = *flags.icf_base;
    if (flags.inertial_cap) cfg.inertial_cap = *flags.inertial_cap;
    if (flags.forbid_consecutive) cfg.forbid_consecutive = *flags.forbid_consecutive;
    cfg.validate();
    return cfg;
}

nlohmann::json predictor_config_json(const PredictorConfig& cfg) {
    return {{"window", cfg.window},
            {"theta_inertial", cfg.theta_inertial},
            {"alpha", cfg.alpha},
            {"icf_base", cfg.icf_base},
            {"inertial_cap", cfg.inertial_cap},
            {"forbid_consecutive", cfg.forbid_consecutive}};
}

fs::path prepare_out_dir(const CommonOpts& common) {
    fs::path dir(common.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ArgumentError("cannot create output directory: " + dir.string());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write file: " + path.string());
    out << text;
}

RunManifest start_manifest(const std::string& command, const CommonOpts& common,
                           const nlohmann::json& config) {
    RunManifest manifest;
    manifest.command = command;
    manifest.seed = common.seed;
    manifest.config = config;
    return manifest;
}

void finish_manifest(RunManifest& manifest, const fs::path& out_dir) {
    const fs::path path = out_dir / (manifest.command + "_manifest.json");
    manifest.outputs.push_back(path.string());
    manifest.write(path.string());
}

TrajectoryLog read_log_file(const std::string& path) {
    TrajectoryLog log;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open log file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_copy(line).empty()) continue;
        try {
            log.add(parse_trajectory_record(line));
        } catch (const Error& e) {
            throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return log;
}

std::vector<ToolSpec> specs_from_json_file(const std::string& path) {
    const auto j = load_json_file(path);
    if (!j.is_array()) throw SchemaError("tools file must hold a JSON array");
    std::vector<ToolSpec> specs;
    for (const auto& tj : j) {
        ToolSpec spec;
        spec.name = tj.at("name").get<std::string>();
        spec.description = tj.value("description", "");
        auto params = [](const nlohmann::json& arr) {
            std::vector<ParamSpec> out;
            for (const auto& p : arr)
                out.push_back({p.at("name").get<std::string>(), p.value("type", ""),
                               p.value("required", true), p.value("description", "")});
            return out;
        };
        if (tj.contains("args")) spec.args = params(tj.at("args"));
        if (tj.contains("returns")) spec.returns = params(tj.at("returns"));
        specs.push_back(std::move(spec));
    }
    return specs;
}

/// Minimal tool signatures inferred from a log: one arg/return entry per
/// parameter name ever observed for the tool, untyped.
std::vector<ToolSpec> infer_specs(const TrajectoryLog& log) {
    std::map<std::string, std::set<std::string>> args, returns;
    for (const auto& t : log.trajectories)
        for (const auto& inv : t.invocations) {
            args.try_emplace(inv.tool_name);
            returns.try_emplace(inv.tool_name);
            for (const auto& [k, v] : inv.inputs) {
                (void)v;
                args[inv.tool_name].insert(k);
            }
            for (const auto& [k, v] : inv.outputs) {
                (void)v;
                returns[inv.tool_name].insert(k);
            }
        }
    std::vector<ToolSpec> specs;
    for (const auto& [name, arg_names] : args) {
        ToolSpec spec;
        spec.name = name;
        spec.description = "tool " + name;
        for (const auto& a : arg_names) spec.args.push_back({a, "", false, "parameter " + a});
        for (const auto& r : returns[name])
            spec.returns.push_back({r, "", false, "result " + r});
        specs.push_back(std::move(spec));
    }
    return specs;
}

nlohmann::json metrics_record(const EpisodeMetrics& m, std::uint64_t seed, int episode) {
    auto j = m.to_json();
    j["seed"] = seed;
    j["episode"] = episode;
    return j;
}

// ---------------------------------------------------------------------------
// ingest

int cmd_ingest(const std::vector<std::string>& inputs, const CommonOpts& common) {
    const fs::path out_dir = prepare_out_dir(common);
    RunManifest manifest = start_manifest("ingest", common, nlohmann::json::object());

    TrajectoryLog log;
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& path : inputs) {
        manifest.add_input(path);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ArgumentError("cannot open file: " + path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim_copy(line).empty()) continue;
            try {
                log.add(parse_trajectory_record(line));
            } catch (const Error& e) {
                violations.push_back(
                    {{"file", path}, {"line", line_no}, {"error", e.what()}});
            }
        }
    }
    for (const auto& v : validate_log(log))
        violations.push_back({{"kind", to_string(v.kind)},
                              {"step_index", v.step_index},
                              {"detail", v.detail}});

    nlohmann::json report;
    report["trajectories"] = log.trajectories.size();
    report["tool_universe"] = log.tool_universe;
    report["violations"] = violations;
    if (log.trajectories.empty()) report["error"] = "no trajectories";

    std::string serialized;
    for (const auto& t : log.trajectories) serialized += serialize_trajectory(t) + "\n";
    const fs::path log_path = out_dir / "log.jsonl";
    const fs::path report_path = out_dir / "ingest_report.json";
    write_text(log_path, serialized);
    write_text(report_path, report.dump(2) + "\n");
    manifest.outputs = {log_path.string(), report_path.string()};
    finish_manifest(manifest, out_dir);

    std::cout << report.dump(2) << "\n";
    return violations.empty() && !log.trajectories.empty() ? kExitOk : kExitDataError;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const std::string& log_path, std::vector<int> orders, bool keep_self,
                int min_length, int max_top_k, const CommonOpts& common) {
    if (orders.empty()) throw ArgumentError("at least one order is required");
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

    const fs::path out_dir = prepare_out_dir(common);
    RunManifest manifest = start_manifest(
        "analyze", common,
        {{"orders", orders}, {"keep_self_transitions", keep_self}, {"min_length", min_length}});
    manifest.add_input(log_path);

    const TrajectoryLog log = read_log_file(log_path);
    const auto sequences = preprocess(log, !keep_self, min_length);
    if (sequences.empty()) throw SchemaError("no usable sequences after preprocessing");

    nlohmann::json report;
    report["sequences"] = sequences.size();
    report["orders"] = nlohmann::json::array();
    std::map<int, TransitionModel> models;
    for (int order : orders) {
        try {
            models.emplace(order, fit_markov(sequences, order));
        } catch (const ArgumentError& e) {
            report["orders"].push_back({{"order", order}, {"error", e.what()}});
            continue;
        }
        const auto& model = models.at(order);
        const auto entropy = conditional_entropy(model);
        nlohmann::json oj;
        oj["order"] = order;
        oj["entropy_bits"] = entropy.entropy_bits;
        oj["max_entropy_bits"] = entropy.max_entropy_bits;
        oj["reduction_percent"] = entropy.reduction_percent;
        oj["total_events"] = model.total_events;
        oj["contexts"] = model.counts.size();
        nlohmann::json masses = nlohmann::json::object();
        for (int k = 1; k <= max_top_k; ++k)
            masses["top_" + std::to_string(k)] = top_k_mass(model, k);
        oj["top_k_mass"] = masses;
        report["orders"].push_back(std::move(oj));
    }

    report["g2_tests"] = nlohmann::json::array();
    for (std::size_t i = 0; i + 1 < orders.size(); ++i) {
        nlohmann::json tj;
        tj["restricted_order"] = orders[i];
        tj["full_order"] = orders[i + 1];
        auto rit = models.find(orders[i]);
        auto fit = models.find(orders[i + 1]);
        if (rit == models.end() || fit == models.end() ||
            fit->second.order != rit->second.order + 1) {
            tj["error"] = "adjacent-order models unavailable";
            report["g2_tests"].push_back(std::move(tj));
            continue;
        }
        try {
            const auto g2 = g2_test(rit->second, fit->second);
            tj["statistic"] = g2.statistic;
            tj["degrees_of_freedom"] = g2.degrees_of_freedom;
            tj["p_value"] = g2.p_value;
        } catch (const ArgumentError& e) {
            tj["error"] = e.what();
        }
        report["g2_tests"].push_back(std::move(tj));
    }

    // per-tool successor tables from the order-1 model when available
    if (auto it = models.find(1); it != models.end()) {
        nlohmann::json tables = nlohmann::json::object();
        for (const auto& [ctx, successors] : it->second.counts) {
            (void)successors;
            nlohmann::json dist = nlohmann::json::array();
            for (const auto& [tool, p] : successor_distribution(it->second, ctx))
                dist.push_back({{"tool", tool}, {"probability", p}});
            tables[ctx.front()] = std::move(dist);
        }
        report["successor_tables"] = std::move(tables);
    }

    const fs::path report_path = out_dir / "analysis.json";
    write_text(report_path, report.dump(2) + "\n");
    manifest.outputs = {report_path.string()};
    finish_manifest(manifest, out_dir);
    std::cout << report.dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// build

int cmd_build(const std::string& log_path, const std::string& tools_path, int window,
              const CommonOpts& common) {
    const fs::path out_dir = prepare_out_dir(common);
    RunManifest manifest = start_manifest("build", common, {{"window", window}});
    manifest.add_input(log_path);
    if (!tools_path.empty()) manifest.add_input(tools_path);

    const TrajectoryLog log = read_log_file(log_path);
    ToolInertiaGraph graph;
    const auto specs =
        tools_path.empty() ? infer_specs(log) : specs_from_json_file(tools_path);
    for (const auto& spec : specs) graph.register_tool(spec);
    UpdateSummary total;
    for (const auto& t : log.trajectories) {
        const auto s = graph.record_trajectory(t, window);
        total.paths_created += s.paths_created;
        total.paths_reinforced += s.paths_reinforced;
        total.edges_created += s.edges_created;
        total.edges_reinforced += s.edges_reinforced;
    }

    const fs::path graph_path = out_dir / "graph.json";
    write_text(graph_path, graph.export_graph("json") + "\n");
    manifest.outputs = {graph_path.string()};
    finish_manifest(manifest, out_dir);

    nlohmann::json summary{{"tools", graph.nodes().size()},
                           {"paths", graph.paths().size()},
                           {"paths_created", total.paths_created},
                           {"paths_reinforced", total.paths_reinforced},
                           {"edges_created", total.edges_created},
                           {"edges_reinforced", total.edges_reinforced},
                           {"graph", graph_path.string()}};
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

int cmd_predict(const std::string& graph_path, const std::vector<std::string>& history,
                const std::string& intuition, const PredictorConfig& cfg,
                const CommonOpts& common) {
    const fs::path out_dir = prepare_out_dir(common);
    RunManifest manifest = start_manifest("predict", common, predictor_config_json(cfg));
    manifest.add_input(graph_path);

    ToolInertiaGraph graph;
    try {
        graph = ToolInertiaGraph::import_graph(read_file(graph_path));
    } catch (const SchemaError& e) {
        // a broken graph file is a graph error, not a data-file error
        throw ArgumentError(e.what());
    }
    LexicalCosineScorer scorer;
    const auto result = predict_next_tool(graph, history, intuition, scorer, cfg);

    nlohmann::json j;
    j["tool"] = result.tool ? nlohmann::json(*result.tool) : nlohmann::json(nullptr);
    j["score_freq"] = result.score_freq;
    j["score_ctx"] = result.score_ctx;
    j["cips"] = result.cips;
    j["w_total"] = result.w_total;
    j["icf"] = result.icf;
    j["candidates"] = nlohmann::json::array();
    for (const auto& [tool, score] : result.candidates)
        j["candidates"].push_back({{"tool", tool}, {"cips", score}});

    const fs::path out_path = out_dir / "prediction.json";
    write_text(out_path, j.dump(2) + "\n");
    manifest.outputs = {out_path.string()};
    finish_manifest(manifest, out_dir);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate / bench

struct EnvFlags {
    int num_tools = 12;
    double rho = 0.887;
    int goal_length = 10;
    double noise = 0.1;
    int max_steps = 64;
};

void add_env_flags(CLI::App* cmd, EnvFlags& env) {
    cmd->add_option("--tools", env.num_tools, "number of environment tools")
        ->capture_default_str();
    cmd->add_option("--rho", env.rho, "dominant-successor probability")->capture_default_str();
    cmd->add_option("--goal-length", env.goal_length, "planted goal sequence length")
        ->capture_default_str();
    cmd->add_option("--noise", env.noise, "oracle wrong-tool rate")->capture_default_str();
    cmd->add_option("--max-steps", env.max_steps, "episode step budget")->capture_default_str();
}

nlohmann::json env_flags_json(const EnvFlags& env) {
    return {{"tools", env.num_tools},
            {"rho", env.rho},
            {"goal_length", env.goal_length},
            {"noise", env.noise},
            {"max_steps", env.max_steps}};
}

HarnessMode mode_from_string(const std::string& name) {
    if (name == "baseline") return HarnessMode::baseline;
    if (name == "autotool") return HarnessMode::autotool;
    if (name == "ngram") return HarnessMode::ngram;
    throw ArgumentError("unknown mode: " + name + " (expected baseline|autotool|ngram)");
}

int cmd_simulate(const std::string& mode_name, int episodes, bool recovery, const EnvFlags& env,
                 const PredictorConfig& cfg, const CommonOpts& common) {
    if (episodes < 1) throw ArgumentError("need at least one episode");
    const HarnessMode mode = mode_from_string(mode_name);
    const fs::path out_dir = prepare_out_dir(common);
    nlohmann::json config = env_flags_json(env);
    config["mode"] = mode_name;
    config["episodes"] = episodes;
    config["recovery"] = recovery;
    config["predictor"] = predictor_config_json(cfg);
    RunManifest manifest = start_manifest("simulate", common, config);

    ChainWorld world({env.num_tools, env.rho, env.goal_length, common.seed});
    ChainWorldOracle oracle(world, env.noise);
    ToolInertiaGraph graph;
    ChainWorldAdapter adapter;
    LexicalCosineScorer scorer;
    FastPathRuntime runtime;
    runtime.mode = mode;
    runtime.graph = &graph;
    runtime.adapter = &adapter;
    runtime.scorer = &scorer;
    runtime.config = cfg;
    runtime.enable_recovery = recovery;
    FastPathRuntime* fast = mode == HarnessMode::baseline ? nullptr : &runtime;

    std::string metrics_lines;
    std::string trajectory_lines;
    for (int e = 0; e < episodes; ++e) {
        auto [metrics, trajectory] =
            run_episode(world, oracle, fast, detail::mix_seed(common.seed, e), e, env.max_steps);
        metrics_lines += metrics_record(metrics, common.seed, e).dump() + "\n";
        trajectory_lines += serialize_trajectory(trajectory) + "\n";
    }

    const fs::path metrics_path = out_dir / "metrics.jsonl";
    const fs::path traj_path = out_dir / "trajectories.jsonl";
    const fs::path graph_path = out_dir / "graph.json";
    write_text(metrics_path, metrics_lines);
    write_text(traj_path, trajectory_lines);
    if (fast) write_text(graph_path, graph.export_graph("json") + "\n");
    manifest.outputs = {metrics_path.string(), traj_path.string()};
    if (fast) manifest.outputs.push_back(graph_path.string());
    finish_manifest(manifest, out_dir);

    std::cout << "wrote " << metrics_path.string() << " and " << traj_path.string() << "\n";
    return kExitOk;
}

int cmd_bench(int episodes, std::vector<std::uint64_t> seeds, bool recovery, const EnvFlags& env,
              const PredictorConfig& cfg, const CommonOpts& common) {
    if (seeds.empty()) seeds = {common.seed};
    const fs::path out_dir = prepare_out_dir(common);
    nlohmann::json config = env_flags_json(env);
    config["episodes"] = episodes;
    config["seeds"] = seeds;
    config["recovery"] = recovery;
    config["predictor"] = predictor_config_json(cfg);
    RunManifest manifest = start_manifest("bench", common, config);

    BenchmarkConfig bench_cfg;
    bench_cfg.env = {env.num_tools, env.rho, env.goal_length, 0};
    bench_cfg.predictor = cfg;
    bench_cfg.oracle_noise = env.noise;
    bench_cfg.episodes = episodes;
    bench_cfg.seeds = seeds;
    bench_cfg.max_steps = env.max_steps;

    const std::vector<VariantSpec> variants = {{"baseline", HarnessMode::baseline, false},
                                               {"autotool", HarnessMode::autotool, recovery},
                                               {"ngram", HarnessMode::ngram, false}};
    const auto report = benchmark(bench_cfg, variants);

    std::string episode_lines;
    for (const auto& v : report.variants)
        for (std::size_t s = 0; s < v.episodes.size(); ++s)
            for (std::size_t e = 0; e < v.episodes[s].size(); ++e) {
                auto j = metrics_record(v.episodes[s][e], seeds[s], static_cast<int>(e));
                j["variant"] = v.spec.name;
                episode_lines += j.dump() + "\n";
            }

    const fs::path comparison_path = out_dir / "comparison.json";
    const fs::path table_path = out_dir / "comparison.txt";
    const fs::path episodes_path = out_dir / "episodes.jsonl";
    write_text(comparison_path, report.to_json().dump(2) + "\n");
    write_text(table_path, report.to_text_table());
    write_text(episodes_path, episode_lines);
    manifest.outputs = {comparison_path.string(), table_path.string(), episodes_path.string()};
    finish_manifest(manifest, out_dir);

    std::cout << report.to_text_table();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// export

int cmd_export(const std::string& graph_path, const std::string& format,
               const CommonOpts& common) {
    const fs::path out_dir = prepare_out_dir(common);
    RunManifest manifest = start_manifest("export", common, {{"format", format}});
    manifest.add_input(graph_path);

    ToolInertiaGraph graph;
    try {
        graph = ToolInertiaGraph::import_graph(read_file(graph_path));
    } catch (const SchemaError& e) {
        throw ArgumentError(e.what());
    }
    const std::string rendered = graph.export_graph(format);
    const fs::path out_path = out_dir / ("graph." + std::string(format == "dot" ? "dot" : "json"));
    write_text(out_path, rendered);
    manifest.outputs = {out_path.string()};
    finish_manifest(manifest, out_dir);
    std::cout << rendered;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tool-inertia graphs: build, predict, analyze, and benchmark"};
    app.require_subcommand(1);

    CommonOpts common;
    PredictorFlagOverrides predictor_flags;

    // ingest
    std::vector<std::string> ingest_inputs;
    auto* ingest = app.add_subcommand("ingest", "parse and validate trajectory JSONL files");
    ingest->add_option("paths", ingest_inputs, "trajectory JSONL files")
        ->required()
        ->check(CLI::ExistingFile);
    add_common_flags(ingest, common);

    // analyze
    std::string analyze_log;
    std::vector<int> analyze_orders = {0, 1, 2};
    bool keep_self = false;
    int min_length = 2;
    int max_top_k = 3;
    auto* analyze = app.add_subcommand("analyze", "entropy and G^2 report over a trajectory log");
    analyze->add_option("--log", analyze_log, "trajectory JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    analyze->add_option("--orders", analyze_orders, "Markov orders to fit")
        ->capture_default_str();
    analyze->add_flag("--keep-self-transitions", keep_self,
                      "keep consecutive repeats of the same tool");
    analyze->add_option("--min-length", min_length, "drop shorter sequences")
        ->capture_default_str();
    analyze->add_option("--top-k", max_top_k, "largest k for top-k successor mass")
        ->capture_default_str();
    add_common_flags(analyze, common);

    // build
    std::string build_log, build_tools;
    int build_window = 2;
    auto* build = app.add_subcommand("build", "build a tool inertia graph from a log");
    build->add_option("--log", build_log, "trajectory JSONL file")
        ->required()
        ->check(CLI::ExistingFile);
    build->add_option("--tools", build_tools, "JSON file with tool signatures")
        ->check(CLI::ExistingFile);
    build->add_option("--window", build_window, "inertia window k")->capture_default_str();
    add_common_flags(build, common);

    // predict
    std::string predict_graph, predict_intuition;
    std::vector<std::string> predict_history;
    auto* predict = app.add_subcommand("predict", "predict the next tool from recent history");
    predict->add_option("--graph", predict_graph, "graph JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    predict->add_option("--history", predict_history, "recent tool names, oldest first")
        ->required();
    predict->add_option("--intuition", predict_intuition, "goal/observation text for relevance");
    add_common_flags(predict, common);
    add_predictor_flags(predict, predictor_flags);

    // simulate
    std::string sim_mode = "autotool";
    int sim_episodes = 10;
    bool sim_recovery = false;
    EnvFlags sim_env;
    auto* simulate = app.add_subcommand("simulate", "run seeded episodes of one variant");
    simulate->add_option("--mode", sim_mode, "baseline | autotool | ngram")
        ->capture_default_str();
    simulate->add_option("--episodes", sim_episodes, "episode count")->capture_default_str();
    simulate->add_flag("--recovery", sim_recovery, "enable the two-failure recovery action");
    add_env_flags(simulate, sim_env);
    add_common_flags(simulate, common);
    add_predictor_flags(simulate, predictor_flags);

    // bench
    int bench_episodes = 40;
    std::vector<std::uint64_t> bench_seeds;
    bool bench_recovery = true;
    EnvFlags bench_env;
    auto* bench = app.add_subcommand("bench", "compare baseline, autotool, and ngram variants");
    bench->add_option("--episodes", bench_episodes, "episodes per seed")->capture_default_str();
    bench->add_option("--seeds", bench_seeds, "seeds (default: --seed)");
    bench->add_flag("--recovery,!--no-recovery", bench_recovery,
                    "recovery action for the autotool variant");
    add_env_flags(bench, bench_env);
    add_common_flags(bench, common);
    add_predictor_flags(bench, predictor_flags);

    // export
    std::string export_graph_path, export_format = "dot";
    auto* export_cmd = app.add_subcommand("export", "re-render a graph file as json or dot");
    export_cmd->add_option("--graph", export_graph_path, "graph JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    export_cmd->add_option("--format", export_format, "json | dot")->capture_default_str();
    add_common_flags(export_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(ingest_inputs, common);
        if (analyze->parsed())
            return cmd_analyze(analyze_log, analyze_orders, keep_self, min_length, max_top_k,
                               common);
        if (build->parsed()) return cmd_build(build_log, build_tools, build_window, common);
        if (predict->parsed())
            return cmd_predict(predict_graph, predict_history, predict_intuition,
                               resolve_predictor_config(common, predictor_flags), common);
        if (simulate->parsed())
            return cmd_simulate(sim_mode, sim_episodes, sim_recovery, sim_env,
                                resolve_predictor_config(common, predictor_flags), common);
        if (bench->parsed())
            return cmd_bench(bench_episodes, bench_seeds, bench_recovery, bench_env,
                             resolve_predictor_config(common, predictor_flags), common);
        if (export_cmd->parsed()) return cmd_export(export_graph_path, export_format, common);
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const SchemaError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}
