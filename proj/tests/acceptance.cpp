// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.
//
// AC-1 formula exactness          AC-5 gate safety
// AC-2 entropy suite              AC-6 directional speedup
// AC-3 G^2 calibration            AC-7 online learning direction
// AC-4 oracle equivalence         AC-8 determinism

#include <autotool/autotool.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace autotool;

namespace {

int g_failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
    if (!ok) ++g_failures;
    std::printf("%s %s — %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ToolSpec simple_tool(const std::string& name) {
    return {name,
            "tool " + name,
            {{"target", "string", true, "target of " + name}},
            {{"result", "string", false, "result of " + name}}};
}

Trajectory tool_sequence_trajectory(const std::vector<std::string>& tools) {
    Trajectory t;
    t.id = "t";
    t.task_goal = "g";
    for (std::size_t i = 0; i < tools.size(); ++i) {
        ToolInvocation inv;
        inv.step_index = static_cast<int>(i);
        inv.tool_name = tools[i];
        t.invocations.push_back(inv);
        t.observations.push_back("");
    }
    return t;
}

// ---------------------------------------------------------------------------

void ac1_formula_exactness() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;

    auto expect = [&](bool cond, const char* what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    };

    expect(inertia_confidence_factor(0.0, 1.1) == 0.0, "ICF(0) != 0");
    expect(std::abs(inertia_confidence_factor(1.0, 1.1) - (1.0 - 1.0 / 1.1)) < 1e-12,
           "ICF(W=1) off");
    expect(std::abs(inertia_confidence_factor(10.0, 1.1) - (1.0 - std::pow(1.1, -10.0))) < 1e-12,
           "ICF(W=10) off");

    // candidate scores must sum exactly to the ICF
    const double w_total = 10.0;
    const double icf = inertia_confidence_factor(w_total, 1.1);
    double sum = 0.0;
    for (double w : {5.0, 3.0, 2.0}) sum += inertia_confidence_score(w, w_total, icf);
    expect(std::abs(sum - icf) < 1e-12, "sum ICS != ICF");

    // CIPS boundary mixes are exact at alpha 0 and 1
    expect(cips(0.37, 0.81, 0.0) == 0.37, "CIPS alpha=0 not exact");
    expect(cips(0.37, 0.81, 1.0) == 0.81, "CIPS alpha=1 not exact");

    const double elapsed = seconds_since(start);
    expect(elapsed < 1.0, "runtime budget exceeded");
    report("AC-1", ok,
           ok ? "formula exactness (ICF/ICS/CIPS) within 1e-12, " +
                    std::to_string(elapsed) + "s"
              : why);
}

void ac2_entropy_suite() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    auto expect = [&](bool cond, const char* what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    };

    // deterministic corpus: exactly zero
    {
        std::vector<ToolSequence> corpus = {{"A", "B", "A", "B", "A", "B", "A", "B"}};
        expect(conditional_entropy(fit_markov(corpus, 1)).entropy_bits == 0.0,
               "deterministic corpus not exactly 0 bits");
    }
    // uniform over 8 symbols: 3.0 bits
    {
        ToolSequence seq;
        for (int rep = 0; rep < 5; ++rep)
            for (int s = 0; s < 8; ++s) seq.push_back(std::string(1, static_cast<char>('a' + s)));
        expect(std::abs(conditional_entropy(fit_markov({seq}, 0)).entropy_bits - 3.0) < 1e-12,
               "uniform-8 corpus not 3.0 bits");
    }
    // two-point (0.887, 0.113) against the closed form
    {
        TransitionModel m;
        m.order = 1;
        m.counts[{"c"}]["x"] = 887;
        m.counts[{"c"}]["y"] = 113;
        m.total_events = 1000;
        m.alphabet = {"c", "x", "y"};
        const double p = 0.887;
        const double closed = -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
        expect(std::abs(conditional_entropy(m).entropy_bits - closed) < 1e-9,
               "two-point entropy off closed form");
    }
    // monotone non-increasing in order over 50 seeded corpora
    for (int seed = 0; seed < 50 && ok; ++seed) {
        std::mt19937_64 rng(seed);
        const int m = 4 + static_cast<int>(rng() % 4);
        std::vector<ToolSequence> corpus;
        for (int s = 0; s < 3; ++s) {
            ToolSequence seq;
            int state = static_cast<int>(rng() % m);
            for (int i = 0; i < 500; ++i) {
                seq.push_back("t" + std::to_string(state));
                state = rng() % 100 < 70 ? (state + 1) % m : static_cast<int>(rng() % m);
            }
            corpus.push_back(std::move(seq));
        }
        double prev = 1e18;
        for (int order = 0; order <= 2; ++order) {
            const double h = conditional_entropy(fit_markov(corpus, order)).entropy_bits;
            expect(h <= prev + 1e-9, "entropy increased with order");
            prev = h;
        }
    }

    const double elapsed = seconds_since(start);
    expect(elapsed < 5.0, "runtime budget exceeded");
    report("AC-2", ok,
           ok ? "entropy exactness and 50-corpus order monotonicity, " +
                    std::to_string(elapsed) + "s"
              : why);
}

void ac3_g2_calibration() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    };

    const int m = 6;
    // null calibration: true order 0, i.i.d. uniform, 2000 events
    int null_accepted = 0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        ToolSequence seq;
        for (int i = 0; i < 2000; ++i) seq.push_back("t" + std::to_string(rng() % m));
        std::vector<ToolSequence> corpus = {seq};
        const auto r = g2_test(fit_markov(corpus, 0), fit_markov(corpus, 1));
        if (r.p_value > 0.05) ++null_accepted;
    }
    expect(null_accepted >= 90,
           "null calibration: only " + std::to_string(null_accepted) + "/100 runs with p > 0.05");

    // power: deterministic order-1 cycle must be detected in 100/100 runs
    int detected = 0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(2000 + seed);
        ToolSequence seq;
        int state = static_cast<int>(rng() % m);
        for (int i = 0; i < 300; ++i) {
            seq.push_back("t" + std::to_string(state));
            state = (state + 1) % m;
        }
        std::vector<ToolSequence> corpus = {seq};
        const auto r = g2_test(fit_markov(corpus, 0), fit_markov(corpus, 1));
        if (r.p_value < 0.001) ++detected;
    }
    expect(detected == 100,
           "power: only " + std::to_string(detected) + "/100 deterministic chains detected");

    // hand-computed tiny corpus: A,B,A,B,A,B gives G^2 = 10 ln 2, df = 1
    {
        std::vector<ToolSequence> corpus = {{"A", "B", "A", "B", "A", "B"}};
        const auto r = g2_test(fit_markov(corpus, 0), fit_markov(corpus, 1));
        expect(std::abs(r.statistic - 10.0 * std::log(2.0)) < 1e-9,
               "tiny-corpus statistic off 10 ln 2");
        expect(r.degrees_of_freedom == 1, "tiny-corpus df != 1");
    }

    const double elapsed = seconds_since(start);
    expect(elapsed < 60.0, "runtime budget exceeded");
    report("AC-3", ok,
           ok ? "G^2 null " + std::to_string(null_accepted) + "/100, power 100/100, exact tiny " +
                    "statistic, " + std::to_string(elapsed) + "s"
              : why);
}

void ac4_oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    };

    std::mt19937_64 rng(404);
    std::vector<std::string> names;
    for (int i = 0; i < 12; ++i) names.push_back("t" + std::to_string(i));

    // find_paths_containing + candidate_successors share the random graphs
    for (int trial = 0; trial < 200 && ok; ++trial) {
        ToolInertiaGraph g;
        for (const auto& n : names) g.register_tool(simple_tool(n));
        const int n_paths = 1 + static_cast<int>(rng() % 50);
        for (int p = 0; p < n_paths; ++p) {
            const int len = 2 + static_cast<int>(rng() % 5);
            std::vector<std::string> tools;
            for (int i = 0; i < len; ++i) tools.push_back(names[rng() % names.size()]);
            if (rng() % 5 == 0 && len > 2) {
                if (!g.find_path_id(tools)) g.record_failure_path(tools, len - 1);
            } else {
                g.record_trajectory(tool_sequence_trajectory(tools), len);
            }
        }
        std::vector<std::string> query;
        const int qlen = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < qlen; ++i) query.push_back(names[rng() % names.size()]);

        expect(g.find_paths_containing(query) == oracles::find_paths_brute(g.paths(), query),
               "find_paths_containing disagrees with brute force (trial " +
                   std::to_string(trial) + ")");

        auto [cands, total] = candidate_successors(g, query);
        auto [expected, expected_total] = oracles::candidates_brute(g.paths(), query);
        bool same = total == expected_total && cands.size() == expected.size();
        for (const auto& c : cands)
            same = same && expected.count(c.tool) && expected.at(c.tool) == c.weight;
        expect(same, "candidate_successors disagrees with brute force (trial " +
                         std::to_string(trial) + ")");
    }

    // backtrack_param_sources on random trajectories
    const std::vector<std::string> values = {"a", "b", "c", "d", "e"};
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 8);
        Trajectory t = tool_sequence_trajectory(std::vector<std::string>(n, "x"));
        for (int i = 0; i < n; ++i) {
            t.invocations[i].tool_name = names[rng() % 4];
            for (int p = 0; p < static_cast<int>(rng() % 3); ++p)
                t.invocations[i].inputs["in" + std::to_string(p)] = values[rng() % values.size()];
            for (int p = 0; p < static_cast<int>(rng() % 3); ++p)
                t.invocations[i].outputs["out" + std::to_string(p)] = values[rng() % values.size()];
        }
        const int step = static_cast<int>(rng() % n);
        auto got = backtrack_param_sources(t, step);
        auto want = oracles::backtrack_brute(t, step);
        bool same = got.size() == want.size();
        for (std::size_t i = 0; same && i < got.size(); ++i)
            same = got[i].target_param == want[i].target_param &&
                   got[i].source_step == want[i].source_step &&
                   got[i].source_tool == want[i].source_tool &&
                   got[i].source_param == want[i].source_param &&
                   got[i].source_direction == want[i].source_direction;
        expect(same, "backtrack_param_sources disagrees with brute force (trial " +
                         std::to_string(trial) + ")");
    }

    // top_k_mass on random corpora
    for (int trial = 0; trial < 200 && ok; ++trial) {
        std::vector<ToolSequence> corpus;
        for (int s = 0; s < 2; ++s) {
            ToolSequence seq;
            const int len = 4 + static_cast<int>(rng() % 40);
            for (int i = 0; i < len; ++i) seq.push_back(names[rng() % 6]);
            corpus.push_back(std::move(seq));
        }
        const auto model = fit_markov(corpus, 1 + static_cast<int>(rng() % 2));
        const int k = 1 + static_cast<int>(rng() % 3);
        expect(std::abs(top_k_mass(model, k) - oracles::top_k_mass_brute(model.counts, k)) <
                   1e-12,
               "top_k_mass disagrees with brute force (trial " + std::to_string(trial) + ")");
    }

    const double elapsed = seconds_since(start);
    expect(elapsed < 30.0, "runtime budget exceeded");
    report("AC-4", ok,
           ok ? "4 operations x 200 randomized instances match brute force, " +
                    std::to_string(elapsed) + "s"
              : why);
}

void ac5_gate_safety() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    };

    // 50 seeded episodes, theta 0.1, cap 0.30 (the defaults)
    PredictorConfig cfg;
    int episodes_checked = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ChainWorld env({12, 0.887, 10, seed});
        ChainWorldOracle oracle(env, 0.1);
        ToolInertiaGraph graph;
        ChainWorldAdapter adapter;
        LexicalCosineScorer scorer;
        FastPathRuntime runtime;
        runtime.mode = HarnessMode::autotool;
        runtime.graph = &graph;
        runtime.adapter = &adapter;
        runtime.scorer = &scorer;
        runtime.config = cfg;
        runtime.enable_recovery = true;
        for (int e = 0; e < 10; ++e) {
            auto [metrics, trajectory] =
                run_episode(env, oracle, &runtime, detail::mix_seed(seed, e), e, 64);
            (void)trajectory;
            ++episodes_checked;
            std::string trace_why;
            expect(!metrics.aborted, "episode aborted: " + metrics.abort_diagnostic);
            expect(validate_trace(metrics, cfg, &trace_why),
                   "trace invariant violated (seed " + std::to_string(seed) + " episode " +
                       std::to_string(e) + "): " + trace_why);
        }
    }
    expect(episodes_checked == 50, "expected 50 episodes");

    // suppressed candidates (net weight <= 0) never become predictions
    {
        ToolInertiaGraph g;
        for (const auto& n : {"A", "B", "C", "X"}) g.register_tool(simple_tool(n));
        g.record_trajectory(tool_sequence_trajectory({"A", "B", "C"}), 2);
        g.record_trajectory(tool_sequence_trajectory({"A", "B", "C"}), 2);
        g.record_failure_path({"X", "A", "B", "C"}, 2);
        g.record_failure_path({"X", "A", "B", "C"}, 2);
        g.record_failure_path({"X", "A", "B", "C"}, 2); // net weight of C is now -1
        LexicalCosineScorer scorer;
        PredictorConfig zero_alpha = cfg;
        zero_alpha.alpha = 0.0;
        const auto r = predict_next_tool(g, {"A", "B"}, "", scorer, zero_alpha);
        expect(!r.tool.has_value(), "failure-suppressed candidate still predicted");
        const auto decision = gate_inertial_call(r, cfg, GateStats{20, 0, false});
        expect(!decision.proceed && decision.reason == FallbackReason::no_candidate,
               "gate let a suppressed candidate through");
    }

    const double elapsed = seconds_since(start);
    expect(elapsed < 60.0, "runtime budget exceeded");
    report("AC-5", ok,
           ok ? "50 episodes respect cap/consecutive invariants; suppression enforced, " +
                    std::to_string(elapsed) + "s"
              : why);
}

struct SpeedupRun {
    ComparisonReport report;
    std::string episodes_blob; // serialized per-episode metrics (the metric file)
};

SpeedupRun run_speedup_benchmark() {
    BenchmarkConfig cfg;
    cfg.env = {12, 0.887, 10, 0};
    cfg.oracle_noise = 0.1;
    cfg.episodes = 40;
    cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    cfg.max_steps = 64;
    SpeedupRun run;
    run.report = benchmark(cfg, {{"baseline", HarnessMode::baseline, false},
                                 {"autotool", HarnessMode::autotool, true},
                                 {"ngram", HarnessMode::ngram, false}});
    for (const auto& v : run.report.variants)
        for (std::size_t s = 0; s < v.episodes.size(); ++s)
            for (std::size_t e = 0; e < v.episodes[s].size(); ++e) {
                auto j = v.episodes[s][e].to_json();
                j["variant"] = v.spec.name;
                j["seed"] = cfg.seeds[s];
                j["episode"] = e;
                run.episodes_blob += j.dump() + "\n";
            }
    return run;
}

void ac6_ac7_ac8() {
    const auto start = std::chrono::steady_clock::now();

    const SpeedupRun first = run_speedup_benchmark();
    const auto* baseline = first.report.find("baseline");
    const auto* autotool_v = first.report.find("autotool");
    const auto* ngram = first.report.find("ngram");

    // AC-6: oracle-call reduction and bounded progress degradation
    {
        bool ok = baseline && autotool_v && ngram;
        std::string why = "missing variant";
        double reduction = 0.0, degradation = 0.0;
        if (ok) {
            reduction = 1.0 - autotool_v->mean_oracle_calls() / baseline->mean_oracle_calls();
            degradation = baseline->mean_progress() - autotool_v->mean_progress();
            if (reduction < 0.15)
                why = "oracle-call reduction " + std::to_string(reduction) + " < 0.15";
            else if (degradation > 0.02)
                why = "progress degradation " + std::to_string(degradation) + " > 0.02";
            ok = reduction >= 0.15 && degradation <= 0.02;
        }
        char detail[256];
        std::snprintf(detail, sizeof(detail),
                      "oracle calls %.2f -> %.2f (-%.1f%%), progress %.3f -> %.3f; "
                      "ngram: %.2f calls, %.3f progress",
                      baseline ? baseline->mean_oracle_calls() : 0.0,
                      autotool_v ? autotool_v->mean_oracle_calls() : 0.0, reduction * 100.0,
                      baseline ? baseline->mean_progress() : 0.0,
                      autotool_v ? autotool_v->mean_progress() : 0.0,
                      ngram ? ngram->mean_oracle_calls() : 0.0,
                      ngram ? ngram->mean_progress() : 0.0);
        report("AC-6", ok, ok ? detail : why + "; " + detail);
    }

    // AC-7: later episodes use more inertial calls than earlier ones
    {
        int improving_seeds = 0;
        const int n_seeds = autotool_v ? static_cast<int>(autotool_v->episodes.size()) : 0;
        for (int s = 0; s < n_seeds; ++s) {
            const auto& eps = autotool_v->episodes[s];
            double early = 0.0, late = 0.0;
            for (int e = 0; e < 20; ++e) early += eps[e].inertial_calls;
            for (int e = 20; e < 40; ++e) late += eps[e].inertial_calls;
            if (late / 20.0 > early / 20.0) ++improving_seeds;
        }
        const bool ok = improving_seeds >= 9;
        report("AC-7", ok,
               "episodes 21-40 mean inertial calls exceed episodes 1-20 for " +
                   std::to_string(improving_seeds) + "/10 seeds (need >= 9)");
    }

    // AC-8: repeating the run yields byte-identical metric files
    {
        const SpeedupRun second = run_speedup_benchmark();
        const bool ok = first.episodes_blob == second.episodes_blob &&
                        first.report.to_json().dump() == second.report.to_json().dump();
        report("AC-8", ok,
               ok ? "repeated 10-seed benchmark produced byte-identical metrics ("
                        + std::to_string(first.episodes_blob.size()) + " bytes)"
                  : "metric bytes differ between identical runs");
    }

    const double elapsed = seconds_since(start);
    if (elapsed >= 300.0) report("AC-6/7/8-runtime", false, "runtime budget exceeded");
    std::printf("benchmark wall time: %.1fs\n", elapsed);
}

} // namespace

int main() {
    ac1_formula_exactness();
    ac2_entropy_suite();
    ac3_g2_calibration();
    ac4_oracle_equivalence();
    ac5_gate_safety();
    ac6_ac7_ac8();
    if (g_failures) {
        std::printf("%d acceptance criteria FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
