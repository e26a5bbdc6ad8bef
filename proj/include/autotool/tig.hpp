#pragma once
// Tool Inertia Graph: hierarchical tool/parameter nodes, frequency-weighted
// tool paths with lookup indices, and parameter-dependency edges learned
// online from trajectories.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "trajectory.hpp"
#include "value.hpp"

namespace autotool {

enum class ParamDirection { input, output };

inline const char* to_string(ParamDirection d) {
    return d == ParamDirection::input ? "input" : "output";
}

struct ParamSpec {
    std::string name;
    std::string type_tag; // "string", "number", "boolean", "string_list", or "" for untyped
    bool required = true;
    std::string description;

    friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ParamSpec> args;
    std::vector<ParamSpec> returns;

    friend bool operator==(const ToolSpec&, const ToolSpec&) = default;
};

/// Parameter node with a bounded cache of recently observed values.
struct ParamNode {
    std::string tool;
    std::string param;
    ParamDirection direction = ParamDirection::input;
    std::deque<Value> example_values;

    void observe(const Value& v, std::size_t capacity) {
        const std::string key = value_key(v);
        for (auto it = example_values.begin(); it != example_values.end(); ++it) {
            if (value_key(*it) == key) {
                example_values.erase(it);
                break;
            }
        }
        example_values.push_back(v);
        while (example_values.size() > capacity) example_values.pop_front();
    }
};

struct ToolNode {
    ToolSpec spec;
    std::int64_t success_count = 0;
    std::int64_t failure_count = 0;
    // one ParamNode per declared arg and per declared return
    std::map<std::pair<std::string, ParamDirection>, ParamNode> param_graph;
};

struct ParamEdgeKey {
    std::string src_tool;
    std::string src_param;
    ParamDirection src_dir = ParamDirection::output;

    friend auto operator<=>(const ParamEdgeKey&, const ParamEdgeKey&) = default;
};

struct ParamEdge {
    ParamEdgeKey source;
    std::string dst_tool;
    std::string dst_param;
    std::int64_t count = 1;
};

struct ToolPath {
    int id = 0;
    std::vector<std::string> tools;
    std::int64_t frequency = 0; // negative marks a suppressed (failure) path
};

struct UpdateSummary {
    int paths_created = 0;
    int paths_reinforced = 0;
    int edges_created = 0;
    int edges_reinforced = 0;
};

/// One resolved dataflow source for an input parameter of a step.
struct ParamSourceMatch {
    std::string target_param;
    int source_step = 0;
    std::string source_tool;
    std::string source_param;
    ParamDirection source_direction = ParamDirection::output;
};

/// Backtrack through earlier steps to find where each input value of
/// `step` came from. Most recent match wins; within one step, outputs are
/// checked before inputs and parameter names break remaining ties.
inline std::vector<ParamSourceMatch> backtrack_param_sources(const Trajectory& t, int step) {
    if (step < 0 || step >= static_cast<int>(t.invocations.size()))
        throw ArgumentError("step out of range");
    std::vector<ParamSourceMatch> out;
    for (const auto& [param, value] : t.invocations[step].inputs) {
        bool found = false;
        for (int s = step - 1; s >= 0 && !found; --s) {
            const auto& prev = t.invocations[s];
            for (const auto& [src_param, src_value] : prev.outputs) {
                if (value_matches_source(value, src_value)) {
                    out.push_back({param, s, prev.tool_name, src_param, ParamDirection::output});
                    found = true;
                    break;
                }
            }
            if (found) break;
            for (const auto& [src_param, src_value] : prev.inputs) {
                if (value_matches_source(value, src_value)) {
                    out.push_back({param, s, prev.tool_name, src_param, ParamDirection::input});
                    found = true;
                    break;
                }
            }
        }
    }
    return out;
}

class ToolInertiaGraph {
public:
    static constexpr std::size_t kExampleValueCapacity = 16;

    const std::map<std::string, ToolNode>& nodes() const { return nodes_; }
    const std::vector<ToolPath>& paths() const { return paths_; }
    const std::map<std::string, std::set<int>>& path_index() const { return path_index_; }
    const std::map<std::vector<std::string>, int>& paths_lookup() const { return paths_lookup_; }

    using ParamEdgeMap =
        std::map<std::string, std::map<std::string, std::map<ParamEdgeKey, ParamEdge>>>;
    const ParamEdgeMap& param_edges() const { return param_edges_; }

    bool has_tool(const std::string& name) const { return nodes_.count(name) != 0; }

    const ToolNode& tool(const std::string& name) const {
        auto it = nodes_.find(name);
        if (it == nodes_.end()) throw UnknownToolError("unknown tool: " + name);
        return it->second;
    }

    const ToolNode& register_tool(const ToolSpec& spec) {
        auto it = nodes_.find(spec.name);
        if (it != nodes_.end()) {
            if (it->second.spec != spec)
                throw ConflictError("conflicting re-registration of tool: " + spec.name);
            return it->second; // idempotent
        }
        ToolNode node;
        node.spec = spec;
        for (const auto& a : spec.args)
            node.param_graph.emplace(std::make_pair(a.name, ParamDirection::input),
                                     ParamNode{spec.name, a.name, ParamDirection::input, {}});
        for (const auto& r : spec.returns)
            node.param_graph.emplace(std::make_pair(r.name, ParamDirection::output),
                                     ParamNode{spec.name, r.name, ParamDirection::output, {}});
        return nodes_.emplace(spec.name, std::move(node)).first->second;
    }

    /// Learn from a trajectory: tool paths come only from maximal
    /// success+oracle segments (inertial or failed steps end a segment and
    /// never add frequency mass); parameter edges and example values are
    /// updated for every step.
    UpdateSummary record_trajectory(const Trajectory& t, int window) {
        if (window <= 0) throw ArgumentError("window must be >= 1");
        for (std::size_t i = 0; i < t.invocations.size(); ++i) {
            if (!has_tool(t.invocations[i].tool_name))
                throw UnknownToolError("unregistered tool '" + t.invocations[i].tool_name +
                                       "' at step " + std::to_string(i));
        }
        UpdateSummary summary;
        const int n = static_cast<int>(t.invocations.size());

        int seg_start = 0;
        auto flush_segment = [&](int seg_end) { // [seg_start, seg_end)
            record_segment_paths(t, seg_start, seg_end, window, summary);
        };
        for (int i = 0; i < n; ++i) {
            const auto& inv = t.invocations[i];
            const bool reinforcing =
                inv.status == StepStatus::success && inv.source == StepSource::oracle;
            if (!reinforcing) {
                flush_segment(i);
                seg_start = i + 1;
            }
            if (inv.status == StepStatus::success) ++nodes_.at(inv.tool_name).success_count;
            else ++nodes_.at(inv.tool_name).failure_count;
            observe_step_values(inv);
            for (const auto& m : backtrack_param_sources(t, i)) {
                upsert_param_edge(m, inv.tool_name, summary);
            }
        }
        flush_segment(n);
        return summary;
    }

    /// Online variant of record_trajectory for a single just-executed step.
    /// `segment_start` is the first index of the current success+oracle run;
    /// callers reset it to step + 1 whenever a step breaks the run. Replaying
    /// every step this way is equivalent to one batch record_trajectory.
    UpdateSummary record_online_step(const Trajectory& t, int step, int segment_start,
                                     int window) {
        if (window <= 0) throw ArgumentError("window must be >= 1");
        if (step < 0 || step >= static_cast<int>(t.invocations.size()))
            throw ArgumentError("step out of range");
        const auto& inv = t.invocations[step];
        if (!has_tool(inv.tool_name))
            throw UnknownToolError("unregistered tool '" + inv.tool_name + "' at step " +
                                   std::to_string(step));
        UpdateSummary summary;
        if (inv.status == StepStatus::success) ++nodes_.at(inv.tool_name).success_count;
        else ++nodes_.at(inv.tool_name).failure_count;
        observe_step_values(inv);
        for (const auto& m : backtrack_param_sources(t, step))
            upsert_param_edge(m, inv.tool_name, summary);
        if (inv.status == StepStatus::success && inv.source == StepSource::oracle) {
            // subsequences of length [2, window + 1] ending at this step
            for (int len = 2; len <= window + 1; ++len) {
                const int start = step - len + 1;
                if (start < segment_start) break;
                std::vector<std::string> seq;
                seq.reserve(len);
                for (int i = start; i <= step; ++i) seq.push_back(t.invocations[i].tool_name);
                auto [id, created] = upsert_path(seq, 1);
                (void)id;
                if (created) ++summary.paths_created;
                else ++summary.paths_reinforced;
            }
        }
        return summary;
    }

    /// Store a suppressed sequence; must be longer than the inertia window.
    const ToolPath& record_failure_path(const std::vector<std::string>& tools, int window) {
        if (window <= 0) throw ArgumentError("window must be >= 1");
        if (static_cast<int>(tools.size()) <= window)
            throw ArgumentError("failure path length must exceed the inertia window");
        for (const auto& name : tools)
            if (!has_tool(name)) throw UnknownToolError("unregistered tool: " + name);
        return paths_[upsert_path(tools, -1).first];
    }

    std::int64_t update_path_efficacy(int path_id, StepStatus outcome,
                                      std::int64_t dw_success = 1,
                                      std::int64_t dw_failure = 1) {
        if (dw_success <= 0 || dw_failure <= 0)
            throw ArgumentError("weight deltas must be positive");
        if (path_id < 0 || path_id >= static_cast<int>(paths_.size()))
            throw NotFoundError("unknown path id: " + std::to_string(path_id));
        auto& p = paths_[path_id];
        p.frequency += outcome == StepStatus::success ? dw_success : -dw_failure;
        return p.frequency;
    }

    std::optional<int> find_path_id(const std::vector<std::string>& tools) const {
        auto it = paths_lookup_.find(tools);
        if (it == paths_lookup_.end()) return std::nullopt;
        return it->second;
    }

    /// Two-phase lookup: intersect per-tool path-id sets, then verify the
    /// query is a contiguous subsequence of each surviving path.
    std::set<int> find_paths_containing(const std::vector<std::string>& sequence) const {
        if (sequence.empty()) throw ArgumentError("sequence must be non-empty");
        for (const auto& name : sequence)
            if (!has_tool(name)) throw UnknownToolError("unregistered tool: " + name);

        auto first = path_index_.find(sequence.front());
        if (first == path_index_.end()) return {};
        std::set<int> candidates = first->second;
        for (std::size_t i = 1; i < sequence.size() && !candidates.empty(); ++i) {
            auto it = path_index_.find(sequence[i]);
            if (it == path_index_.end()) return {};
            std::set<int> narrowed;
            std::set_intersection(candidates.begin(), candidates.end(), it->second.begin(),
                                  it->second.end(),
                                  std::inserter(narrowed, narrowed.begin()));
            candidates.swap(narrowed);
        }
        std::set<int> out;
        for (int id : candidates)
            if (!occurrences(paths_[id].tools, sequence).empty()) out.insert(id);
        return out;
    }

    /// Start positions of each contiguous occurrence of `needle` in `haystack`.
    static std::vector<int> occurrences(const std::vector<std::string>& haystack,
                                        const std::vector<std::string>& needle) {
        std::vector<int> out;
        if (needle.empty() || needle.size() > haystack.size()) return out;
        for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
            bool match = true;
            for (std::size_t j = 0; j < needle.size(); ++j) {
                if (haystack[i + j] != needle[j]) {
                    match = false;
                    break;
                }
            }
            if (match) out.push_back(static_cast<int>(i));
        }
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tools"] = nlohmann::json::array();
        for (const auto& [name, node] : nodes_) {
            nlohmann::json tn;
            tn["name"] = name;
            tn["description"] = node.spec.description;
            tn["success_count"] = node.success_count;
            tn["failure_count"] = node.failure_count;
            auto specs_to_json = [](const std::vector<ParamSpec>& specs) {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& p : specs)
                    arr.push_back({{"name", p.name},
                                   {"type", p.type_tag},
                                   {"required", p.required},
                                   {"description", p.description}});
                return arr;
            };
            tn["args"] = specs_to_json(node.spec.args);
            tn["returns"] = specs_to_json(node.spec.returns);
            nlohmann::json examples = nlohmann::json::object();
            for (const auto& [key, pn] : node.param_graph) {
                if (pn.example_values.empty()) continue;
                nlohmann::json vals = nlohmann::json::array();
                for (const auto& v : pn.example_values) vals.push_back(value_to_json(v));
                examples[std::string(to_string(key.second)) + ":" + key.first] = vals;
            }
            tn["example_values"] = examples;
            j["tools"].push_back(std::move(tn));
        }
        j["paths"] = nlohmann::json::array();
        for (const auto& p : paths_)
            j["paths"].push_back({{"id", p.id}, {"tools", p.tools}, {"frequency", p.frequency}});
        j["param_edges"] = nlohmann::json::array();
        for (const auto& [dst_tool, by_param] : param_edges_)
            for (const auto& [dst_param, by_src] : by_param)
                for (const auto& [key, edge] : by_src)
                    j["param_edges"].push_back({{"src_tool", key.src_tool},
                                                {"src_param", key.src_param},
                                                {"src_dir", to_string(key.src_dir)},
                                                {"dst_tool", dst_tool},
                                                {"dst_param", dst_param},
                                                {"count", edge.count}});
        return j;
    }

    /// DOT export lists tool nodes and length-2 path projections with
    /// frequency labels.
    std::string to_dot() const {
        std::map<std::pair<std::string, std::string>, std::int64_t> edges;
        for (const auto& p : paths_)
            for (std::size_t i = 0; i + 1 < p.tools.size(); ++i)
                edges[{p.tools[i], p.tools[i + 1]}] += p.frequency;
        std::ostringstream os;
        os << "digraph tig {\n";
        for (const auto& [name, node] : nodes_) {
            (void)node;
            os << "  \"" << name << "\";\n";
        }
        for (const auto& [pair, weight] : edges)
            os << "  \"" << pair.first << "\" -> \"" << pair.second << "\" [label=\"" << weight
               << "\"];\n";
        os << "}\n";
        return os.str();
    }

    std::string export_graph(const std::string& format = "json") const {
        if (format == "json") return to_json().dump(2);
        if (format == "dot") return to_dot();
        throw ArgumentError("unknown export format: " + format);
    }

    static ToolInertiaGraph import_graph(const std::string& bytes) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(bytes);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(std::string("graph JSON malformed: ") + e.what());
        }
        return from_json(j);
    }

    static ToolInertiaGraph from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("tools") || !j.contains("paths") ||
            !j.contains("param_edges"))
            throw SchemaError("graph document requires tools/paths/param_edges");
        ToolInertiaGraph g;
        auto specs_from_json = [](const nlohmann::json& arr) {
            std::vector<ParamSpec> specs;
            for (const auto& p : arr)
                specs.push_back({p.at("name").get<std::string>(), p.at("type").get<std::string>(),
                                 p.at("required").get<bool>(),
                                 p.at("description").get<std::string>()});
            return specs;
        };
        for (const auto& tn : j.at("tools")) {
            ToolSpec spec{tn.at("name").get<std::string>(),
                          tn.at("description").get<std::string>(),
                          specs_from_json(tn.at("args")), specs_from_json(tn.at("returns"))};
            g.register_tool(spec);
            auto& node = g.nodes_.at(spec.name);
            node.success_count = tn.value("success_count", std::int64_t{0});
            node.failure_count = tn.value("failure_count", std::int64_t{0});
            if (tn.contains("example_values")) {
                for (auto it = tn.at("example_values").begin(); it != tn.at("example_values").end();
                     ++it) {
                    const std::string key = it.key();
                    auto colon = key.find(':');
                    if (colon == std::string::npos) throw SchemaError("bad example_values key");
                    ParamDirection dir = key.substr(0, colon) == "input" ? ParamDirection::input
                                                                         : ParamDirection::output;
                    auto pn = node.param_graph.find({key.substr(colon + 1), dir});
                    if (pn == node.param_graph.end())
                        throw SchemaError("example values for undeclared parameter: " + key);
                    for (const auto& v : it.value())
                        pn->second.example_values.push_back(value_from_json(v));
                }
            }
        }
        // Paths are rebuilt through upsert to restore id order and indices.
        std::vector<ToolPath> sorted;
        for (const auto& pj : j.at("paths"))
            sorted.push_back({pj.at("id").get<int>(),
                              pj.at("tools").get<std::vector<std::string>>(),
                              pj.at("frequency").get<std::int64_t>()});
        std::sort(sorted.begin(), sorted.end(),
                  [](const ToolPath& a, const ToolPath& b) { return a.id < b.id; });
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i].id != static_cast<int>(i)) throw SchemaError("path ids must be dense");
            if (sorted[i].tools.size() < 2) throw SchemaError("path length must be >= 2");
            for (const auto& name : sorted[i].tools)
                if (!g.has_tool(name)) throw SchemaError("path references unknown tool: " + name);
            auto [id, created] = g.upsert_path(sorted[i].tools, sorted[i].frequency);
            if (!created) throw SchemaError("duplicate path tool sequence");
            (void)id;
        }
        for (const auto& ej : j.at("param_edges")) {
            ParamEdgeKey key{ej.at("src_tool").get<std::string>(),
                             ej.at("src_param").get<std::string>(),
                             ej.at("src_dir").get<std::string>() == "input"
                                 ? ParamDirection::input
                                 : ParamDirection::output};
            const std::string dst_tool = ej.at("dst_tool").get<std::string>();
            const std::string dst_param = ej.at("dst_param").get<std::string>();
            if (!g.has_tool(key.src_tool) || !g.has_tool(dst_tool))
                throw SchemaError("param edge references unknown tool");
            const auto count = ej.at("count").get<std::int64_t>();
            if (count < 1) throw SchemaError("param edge count must be >= 1");
            g.param_edges_[dst_tool][dst_param][key] = ParamEdge{key, dst_tool, dst_param, count};
        }
        return g;
    }

    bool structurally_equal(const ToolInertiaGraph& other) const {
        return to_json() == other.to_json();
    }

private:
    void record_segment_paths(const Trajectory& t, int begin, int end, int window,
                              UpdateSummary& summary) {
        // every contiguous subsequence of length in [2, window + 1], visited
        // by ending step so ids come out identical to per-step online updates
        for (int step = begin; step < end; ++step) {
            for (int len = 2; len <= window + 1; ++len) {
                const int start = step - len + 1;
                if (start < begin) break;
                std::vector<std::string> seq;
                seq.reserve(len);
                for (int i = start; i <= step; ++i) seq.push_back(t.invocations[i].tool_name);
                auto [id, created] = upsert_path(seq, 1);
                (void)id;
                if (created) ++summary.paths_created;
                else ++summary.paths_reinforced;
            }
        }
    }

    void observe_step_values(const ToolInvocation& inv) {
        auto& node = nodes_.at(inv.tool_name);
        for (const auto& [k, v] : inv.inputs) {
            auto it = node.param_graph.find({k, ParamDirection::input});
            if (it != node.param_graph.end()) it->second.observe(v, kExampleValueCapacity);
        }
        for (const auto& [k, v] : inv.outputs) {
            auto it = node.param_graph.find({k, ParamDirection::output});
            if (it != node.param_graph.end()) it->second.observe(v, kExampleValueCapacity);
        }
    }

    void upsert_param_edge(const ParamSourceMatch& m, const std::string& dst_tool,
                           UpdateSummary& summary) {
        ParamEdgeKey key{m.source_tool, m.source_param, m.source_direction};
        auto& slot = param_edges_[dst_tool][m.target_param];
        auto it = slot.find(key);
        if (it == slot.end()) {
            slot.emplace(key, ParamEdge{key, dst_tool, m.target_param, 1});
            ++summary.edges_created;
        } else {
            ++it->second.count;
            ++summary.edges_reinforced;
        }
    }

    // Returns (path id, created?). Applies `delta` to the frequency.
    std::pair<int, bool> upsert_path(const std::vector<std::string>& tools, std::int64_t delta) {
        auto it = paths_lookup_.find(tools);
        if (it != paths_lookup_.end()) {
            paths_[it->second].frequency += delta;
            return {it->second, false};
        }
        const int id = static_cast<int>(paths_.size());
        paths_.push_back({id, tools, delta});
        paths_lookup_.emplace(tools, id);
        for (const auto& name : tools) path_index_[name].insert(id);
        return {id, true};
    }

    std::map<std::string, ToolNode> nodes_;
    std::vector<ToolPath> paths_;
    std::map<std::string, std::set<int>> path_index_;
    std::map<std::vector<std::string>, int> paths_lookup_;
    ParamEdgeMap param_edges_;
};

} // namespace autotool
