#include <doctest.h>

#include <autotool/predictor.hpp>

#include <random>
#include <set>

#include "oracles.hpp"

using namespace autotool;

namespace {

// Build a graph directly from (tool-sequence, frequency) pairs.
ToolInertiaGraph graph_from_paths(
    const std::vector<std::pair<std::vector<std::string>, std::int64_t>>& paths) {
    nlohmann::json j;
    j["tools"] = nlohmann::json::array();
    std::set<std::string> names;
    for (const auto& [tools, freq] : paths) {
        (void)freq;
        names.insert(tools.begin(), tools.end());
    }
    for (const auto& n : names)
        j["tools"].push_back({{"name", n},
                              {"description", "tool " + n},
                              {"args", nlohmann::json::array()},
                              {"returns", nlohmann::json::array()}});
    j["paths"] = nlohmann::json::array();
    int id = 0;
    for (const auto& [tools, freq] : paths)
        j["paths"].push_back({{"id", id++}, {"tools", tools}, {"frequency", freq}});
    j["param_edges"] = nlohmann::json::array();
    return ToolInertiaGraph::from_json(j);
}

struct ConstantScorer : RelevanceScorer {
    double value;
    explicit ConstantScorer(double v) : value(v) {}
    double score(const std::string&, const std::string&) const override { return value; }
};

struct PoisonedScorer : RelevanceScorer {
    double score(const std::string&, const std::string&) const override {
        throw std::logic_error("scorer must not be consulted when alpha is 0");
    }
};

} // namespace

TEST_CASE("candidate_successors") {
    SUBCASE("aggregates over occurrences and paths") {
        auto g = graph_from_paths({{{"A", "B", "C"}, 2}, {{"A", "B", "D"}, 1}});
        auto [cands, total] = candidate_successors(g, {"A", "B"});
        REQUIRE(cands.size() == 2);
        CHECK(cands[0].tool == "C");
        CHECK(cands[0].weight == 2);
        CHECK(cands[1].tool == "D");
        CHECK(cands[1].weight == 1);
        CHECK(total == 3);
    }
    SUBCASE("failure paths suppress candidates") {
        auto g = graph_from_paths({{{"A", "B", "C"}, 2}, {{"X", "A", "B", "C"}, -3}});
        auto [cands, total] = candidate_successors(g, {"A", "B"});
        CHECK(cands.empty());
        CHECK(total == 0);
    }
    SUBCASE("window at path end contributes nothing") {
        auto g = graph_from_paths({{{"A", "B"}, 5}});
        auto [cands, total] = candidate_successors(g, {"A", "B"});
        CHECK(cands.empty());
        CHECK(total == 0);
    }
    SUBCASE("unknown tool in window means no candidates, not an error") {
        auto g = graph_from_paths({{{"A", "B", "C"}, 2}});
        auto [cands, total] = candidate_successors(g, {"A", "Z"});
        CHECK(cands.empty());
        CHECK(total == 0);
    }
    SUBCASE("repeated occurrence inside one path counts each time") {
        auto g = graph_from_paths({{{"A", "B", "A", "B", "C"}, 1}});
        auto [cands, total] = candidate_successors(g, {"A", "B"});
        REQUIRE(cands.size() == 2);
        CHECK(cands[0].tool == "A");
        CHECK(cands[1].tool == "C");
        CHECK(total == 2);
    }
}

TEST_CASE("candidate_successors agrees with brute-force oracle") {
    std::mt19937_64 rng(31);
    const std::vector<std::string> names = {"A", "B", "C", "D", "E"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<std::vector<std::string>, std::int64_t>> paths;
        std::set<std::vector<std::string>> seen;
        const int n_paths = 1 + static_cast<int>(rng() % 10);
        for (int p = 0; p < n_paths; ++p) {
            const int len = 2 + static_cast<int>(rng() % 4);
            std::vector<std::string> tools;
            for (int i = 0; i < len; ++i) tools.push_back(names[rng() % names.size()]);
            if (!seen.insert(tools).second) continue;
            paths.push_back({tools, static_cast<std::int64_t>(rng() % 7) - 2});
        }
        auto g = graph_from_paths(paths);
        std::vector<std::string> window;
        const int wlen = 1 + static_cast<int>(rng() % 2);
        for (int i = 0; i < wlen; ++i) window.push_back(names[rng() % names.size()]);

        auto [cands, total] = candidate_successors(g, window);
        auto [expected, expected_total] = oracles::candidates_brute(g.paths(), window);
        CHECK(total == expected_total);
        REQUIRE(cands.size() == expected.size());
        for (const auto& c : cands) {
            REQUIRE(expected.count(c.tool) == 1);
            CHECK(c.weight == expected.at(c.tool));
        }
    }
}

TEST_CASE("inertia_confidence_factor") {
    CHECK(inertia_confidence_factor(0.0, 1.1) == doctest::Approx(0.0));
    CHECK(inertia_confidence_factor(1.0, 1.1) == doctest::Approx(1.0 - 1.0 / 1.1));
    CHECK(inertia_confidence_factor(10.0, 1.1) == doctest::Approx(0.6144567105704685));
    CHECK(inertia_confidence_factor(1000.0, 1.1) > 0.999999);
    CHECK(inertia_confidence_factor(5.0, 1.1) < 1.0);
    // strictly increasing in total evidence
    double prev = -1.0;
    for (double w : {0.0, 1.0, 2.0, 5.0, 10.0, 50.0}) {
        const double v = inertia_confidence_factor(w, 1.1);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(inertia_confidence_factor(-1.0, 1.1), ArgumentError);
    CHECK_THROWS_AS(inertia_confidence_factor(1.0, 1.0), ArgumentError);
}

TEST_CASE("inertia_confidence_score and its sum rule") {
    const double icf = inertia_confidence_factor(10.0, 1.1);
    CHECK(inertia_confidence_score(7.0, 10.0, icf) == doctest::Approx(0.7 * icf));
    CHECK(inertia_confidence_score(3.0, 10.0, icf) == doctest::Approx(0.3 * icf));
    // scores over all candidates sum to the ICF itself
    CHECK(inertia_confidence_score(7.0, 10.0, icf) + inertia_confidence_score(3.0, 10.0, icf) ==
          doctest::Approx(icf));
    CHECK_THROWS_AS(inertia_confidence_score(0.0, 10.0, icf), ArgumentError);
    CHECK_THROWS_AS(inertia_confidence_score(11.0, 10.0, icf), ArgumentError);
    CHECK_THROWS_AS(inertia_confidence_score(1.0, 0.0, icf), ArgumentError);
}

TEST_CASE("cips blending and domain checks") {
    CHECK(cips(0.4, 0.8, 0.5) == doctest::Approx(0.6));
    CHECK(cips(0.4, 0.8, 0.0) == doctest::Approx(0.4));
    CHECK(cips(0.4, 0.8, 1.0) == doctest::Approx(0.8));
    CHECK_THROWS_AS(cips(-0.1, 0.5, 0.5), ArgumentError);
    CHECK_THROWS_AS(cips(0.5, 1.1, 0.5), ArgumentError);
    CHECK_THROWS_AS(cips(0.5, 0.5, 1.5), ArgumentError);
}

TEST_CASE("predict_next_tool") {
    PredictorConfig cfg;
    cfg.alpha = 0.0;
    ConstantScorer half(0.5);

    SUBCASE("picks the heaviest successor") {
        auto g = graph_from_paths({{{"A", "B", "C"}, 5}, {{"A", "B", "D"}, 2}});
        auto r = predict_next_tool(g, {"A", "B"}, "goal", half, cfg);
        REQUIRE(r.tool.has_value());
        CHECK(*r.tool == "C");
        CHECK(r.w_total == doctest::Approx(7.0));
        CHECK(r.score_freq ==
              doctest::Approx((5.0 / 7.0) * inertia_confidence_factor(7.0, 1.1)));
        CHECK(r.candidates.size() == 2);
    }
    SUBCASE("empty history yields no prediction") {
        auto g = graph_from_paths({{{"A", "B"}, 1}});
        CHECK_FALSE(predict_next_tool(g, {}, "goal", half, cfg).tool.has_value());
    }
    SUBCASE("warm-up truncates the window to available history") {
        auto g = graph_from_paths({{{"B", "C"}, 4}});
        auto r = predict_next_tool(g, {"B"}, "goal", half, cfg);
        REQUIRE(r.tool.has_value());
        CHECK(*r.tool == "C");
    }
    SUBCASE("only the last window tools matter") {
        auto g = graph_from_paths({{{"A", "B", "C"}, 3}});
        // suffix {A,B} is used even though Q/Z never appear in the graph
        auto r = predict_next_tool(g, {"Q", "Z", "A", "B"}, "goal", half, cfg);
        REQUIRE(r.tool.has_value());
        CHECK(*r.tool == "C");
        // but the window itself containing an unknown tool yields nothing
        r = predict_next_tool(g, {"A", "Q"}, "goal", half, cfg);
        CHECK_FALSE(r.tool.has_value());
    }
    SUBCASE("ties break to the lexicographically smaller tool") {
        auto g = graph_from_paths({{{"A", "B", "D"}, 3}, {{"A", "B", "C"}, 3}});
        auto r = predict_next_tool(g, {"A", "B"}, "goal", half, cfg);
        REQUIRE(r.tool.has_value());
        CHECK(*r.tool == "C");
    }
    SUBCASE("argmax is invariant to uniform frequency scaling") {
        auto small = graph_from_paths({{{"A", "B", "C"}, 5}, {{"A", "B", "D"}, 2}});
        auto big = graph_from_paths({{{"A", "B", "C"}, 500}, {{"A", "B", "D"}, 200}});
        auto rs = predict_next_tool(small, {"A", "B"}, "goal", half, cfg);
        auto rb = predict_next_tool(big, {"A", "B"}, "goal", half, cfg);
        CHECK(*rs.tool == *rb.tool);
        CHECK(rb.cips > rs.cips); // more evidence, more confidence
    }
    SUBCASE("alpha = 0 never consults the relevance scorer") {
        auto g = graph_from_paths({{{"A", "B", "C"}, 5}});
        PoisonedScorer poison;
        auto r = predict_next_tool(g, {"A", "B"}, "goal", poison, cfg);
        REQUIRE(r.tool.has_value());
        CHECK(r.score_ctx == 0.0);
    }
    SUBCASE("alpha blends in the contextual score") {
        auto g = graph_from_paths({{{"A", "B", "C"}, 5}});
        PredictorConfig blended = cfg;
        blended.alpha = 0.5;
        ConstantScorer one(1.0);
        auto r0 = predict_next_tool(g, {"A", "B"}, "goal", half, cfg);
        auto r1 = predict_next_tool(g, {"A", "B"}, "goal", one, blended);
        CHECK(r1.cips == doctest::Approx(0.5 * r0.score_freq + 0.5));
    }
    SUBCASE("invalid config rejected up front") {
        auto g = graph_from_paths({{{"A", "B"}, 1}});
        PredictorConfig bad = cfg;
        bad.alpha = 2.0;
        CHECK_THROWS_AS(predict_next_tool(g, {"A"}, "goal", half, bad), ArgumentError);
    }
}

TEST_CASE("gate_inertial_call") {
    PredictorConfig cfg; // theta 0.1, cap 0.30, no consecutive
    PredictionResult strong;
    strong.tool = "C";
    strong.cips = 0.5;

    SUBCASE("proceeds with budget available") {
        auto d = gate_inertial_call(strong, cfg, {9, 2, false});
        CHECK(d.proceed);
        CHECK(d.reason == FallbackReason::none);
    }
    SUBCASE("no candidate") {
        PredictionResult none;
        auto d = gate_inertial_call(none, cfg, {0, 0, false});
        CHECK_FALSE(d.proceed);
        CHECK(d.reason == FallbackReason::no_candidate);
    }
    SUBCASE("threshold is strict") {
        PredictionResult at = strong;
        at.cips = 0.1;
        auto d = gate_inertial_call(at, cfg, {9, 0, false});
        CHECK_FALSE(d.proceed);
        CHECK(d.reason == FallbackReason::below_threshold);
    }
    SUBCASE("cap counts the prospective action") {
        // 3 inertial out of 9 so far: a 4th of 10 would breach 0.30
        auto d = gate_inertial_call(strong, cfg, {9, 3, false});
        CHECK_FALSE(d.proceed);
        CHECK(d.reason == FallbackReason::cap_exceeded);
        // 2 of 9: 3 of 10 is exactly the cap, allowed
        CHECK(gate_inertial_call(strong, cfg, {9, 2, false}).proceed);
    }
    SUBCASE("consecutive inertial forbidden") {
        auto d = gate_inertial_call(strong, cfg, {9, 1, true});
        CHECK_FALSE(d.proceed);
        CHECK(d.reason == FallbackReason::consecutive_forbidden);
        PredictorConfig relaxed = cfg;
        relaxed.forbid_consecutive = false;
        CHECK(gate_inertial_call(strong, relaxed, {9, 1, true}).proceed);
    }
    SUBCASE("cold start: very first action can never be inertial under a fractional cap") {
        auto d = gate_inertial_call(strong, cfg, {0, 0, false});
        CHECK_FALSE(d.proceed);
        CHECK(d.reason == FallbackReason::cap_exceeded);
    }
    SUBCASE("reason order: threshold is reported before cap") {
        PredictionResult weak = strong;
        weak.cips = 0.05;
        auto d = gate_inertial_call(weak, cfg, {0, 0, true});
        CHECK(d.reason == FallbackReason::below_threshold);
    }
}
