#pragma once
// Markov statistics over tool-name sequences: k-th order transition
// counts, conditional entropy, G^2 likelihood-ratio tests between adjacent
// orders, successor distributions, and top-k successor mass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "trajectory.hpp"

namespace autotool {

using ToolSequence = std::vector<std::string>;
using Context = std::vector<std::string>;

struct TransitionModel {
    int order = 0;
    std::map<Context, std::map<std::string, std::int64_t>> counts;
    std::int64_t total_events = 0;
    std::set<std::string> alphabet;
};

struct EntropyReport {
    int order = 0;
    double entropy_bits = 0.0;
    double max_entropy_bits = 0.0;
    double reduction_percent = 0.0;
};

struct G2Report {
    double statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
};

/// Collapse self-transitions (A,A,B -> A,B) and drop short sequences.
inline std::vector<ToolSequence> preprocess(const TrajectoryLog& log, bool drop_self_transitions,
                                            int min_length) {
    std::vector<ToolSequence> out;
    for (const auto& t : log.trajectories) {
        ToolSequence seq;
        for (const auto& inv : t.invocations) {
            if (drop_self_transitions && !seq.empty() && seq.back() == inv.tool_name) continue;
            seq.push_back(inv.tool_name);
        }
        if (static_cast<int>(seq.size()) >= min_length) out.push_back(std::move(seq));
    }
    return out;
}

inline std::vector<ToolSequence> preprocess_sequences(std::vector<ToolSequence> sequences,
                                                      bool drop_self_transitions, int min_length) {
    std::vector<ToolSequence> out;
    for (auto& raw : sequences) {
        ToolSequence seq;
        for (auto& name : raw) {
            if (drop_self_transitions && !seq.empty() && seq.back() == name) continue;
            seq.push_back(std::move(name));
        }
        if (static_cast<int>(seq.size()) >= min_length) out.push_back(std::move(seq));
    }
    return out;
}

/// Order 0 uses the empty context and counts every symbol occurrence.
inline TransitionModel fit_markov(const std::vector<ToolSequence>& sequences, int order) {
    if (order < 0) throw ArgumentError("order must be >= 0");
    TransitionModel model;
    model.order = order;
    for (const auto& seq : sequences) {
        for (const auto& name : seq) model.alphabet.insert(name);
        const int n = static_cast<int>(seq.size());
        if (order == 0) {
            for (const auto& name : seq) {
                ++model.counts[{}][name];
                ++model.total_events;
            }
            continue;
        }
        for (int t = order; t < n; ++t) {
            Context ctx(seq.begin() + (t - order), seq.begin() + t);
            ++model.counts[ctx][seq[t]];
            ++model.total_events;
        }
    }
    if (model.total_events == 0) throw ArgumentError("no usable events for the requested order");
    return model;
}

/// H(next | context) = -sum p(ctx, next) log2 p(next | ctx), 0 log 0 = 0.
inline EntropyReport conditional_entropy(const TransitionModel& model) {
    if (model.total_events <= 0) throw ArgumentError("model has no events");
    const double n = static_cast<double>(model.total_events);
    double entropy = 0.0;
    for (const auto& [ctx, successors] : model.counts) {
        (void)ctx;
        double row_total = 0.0;
        for (const auto& [tool, c] : successors) {
            (void)tool;
            row_total += static_cast<double>(c);
        }
        for (const auto& [tool, c] : successors) {
            (void)tool;
            if (c == 0) continue;
            const double joint = static_cast<double>(c) / n;
            const double cond = static_cast<double>(c) / row_total;
            entropy -= joint * std::log2(cond);
        }
    }
    EntropyReport report;
    report.order = model.order;
    report.entropy_bits = std::max(0.0, entropy);
    report.max_entropy_bits =
        model.alphabet.empty() ? 0.0 : std::log2(static_cast<double>(model.alphabet.size()));
    report.reduction_percent =
        report.max_entropy_bits > 0.0
            ? (1.0 - report.entropy_bits / report.max_entropy_bits) * 100.0
            : 100.0;
    return report;
}

namespace detail {

// Regularized incomplete gamma functions P(a,x) and Q(a,x), series for
// x < a+1 and continued fraction otherwise. Accurate to ~1e-14.
inline double gamma_p_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    double ap = a;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double regularized_gamma_q(double a, double x) {
    if (a <= 0.0) throw ArgumentError("gamma shape must be positive");
    if (x < 0.0) throw ArgumentError("gamma argument must be non-negative");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_contfrac(a, x);
}

} // namespace detail

/// Upper-tail probability of a chi-square distribution.
inline double chi_square_upper_tail(double statistic, int df) {
    if (df <= 0) throw ArgumentError("degrees of freedom must be positive");
    if (statistic < 0.0) throw ArgumentError("statistic must be non-negative");
    return detail::regularized_gamma_q(df / 2.0, statistic / 2.0);
}

/// Likelihood-ratio test of an order-(k+1) model against an order-k model
/// fit on the same sequences. Degrees of freedom count observed contexts
/// only: (#full contexts - #restricted contexts) * (|alphabet| - 1).
inline G2Report g2_test(const TransitionModel& restricted, const TransitionModel& full) {
    if (full.order != restricted.order + 1)
        throw ArgumentError("full model order must be restricted order + 1");
    if (full.alphabet != restricted.alphabet)
        throw ArgumentError("models were fit on different event sets");
    const int m = static_cast<int>(restricted.alphabet.size());
    const int df = (static_cast<int>(full.counts.size()) -
                    static_cast<int>(restricted.counts.size())) *
                   (m - 1);
    if (df <= 0) throw ArgumentError("degenerate test: no additional free parameters");

    const double n_restricted = static_cast<double>(restricted.total_events);
    double statistic = 0.0;
    for (const auto& [ctx, successors] : full.counts) {
        double row_total = 0.0;
        for (const auto& [tool, c] : successors) {
            (void)tool;
            row_total += static_cast<double>(c);
        }
        // conditional of the restricted model given the context suffix
        Context suffix(ctx.end() - restricted.order, ctx.end());
        auto rit = restricted.counts.find(suffix);
        if (rit == restricted.counts.end())
            throw ArgumentError("models were fit on different event sets");
        double suffix_total = 0.0;
        for (const auto& [tool, c] : rit->second) {
            (void)tool;
            suffix_total += static_cast<double>(c);
        }
        (void)n_restricted;
        for (const auto& [tool, observed] : successors) {
            if (observed == 0) continue;
            auto sit = rit->second.find(tool);
            if (sit == rit->second.end())
                throw ArgumentError("models were fit on different event sets");
            const double p = static_cast<double>(sit->second) / suffix_total;
            const double expected = row_total * p;
            statistic += static_cast<double>(observed) *
                         std::log(static_cast<double>(observed) / expected);
        }
    }
    statistic *= 2.0;
    G2Report report;
    report.statistic = std::max(0.0, statistic);
    report.degrees_of_freedom = df;
    report.p_value = chi_square_upper_tail(report.statistic, df);
    return report;
}

/// Successor probabilities for an observed context, sorted by descending
/// probability with lexicographic tie-break.
inline std::vector<std::pair<std::string, double>> successor_distribution(
    const TransitionModel& model, const Context& context) {
    auto it = model.counts.find(context);
    if (it == model.counts.end()) throw NotFoundError("context not observed in model");
    double total = 0.0;
    for (const auto& [tool, c] : it->second) {
        (void)tool;
        total += static_cast<double>(c);
    }
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [tool, c] : it->second) out.emplace_back(tool, static_cast<double>(c) / total);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

/// Mean over observed contexts of the probability mass held by the k most
/// likely successors.
inline double top_k_mass(const TransitionModel& model, int k) {
    if (k < 1) throw ArgumentError("k must be >= 1");
    if (model.counts.empty()) throw ArgumentError("model is empty");
    double sum = 0.0;
    for (const auto& [ctx, successors] : model.counts) {
        (void)successors;
        auto dist = successor_distribution(model, ctx);
        double mass = 0.0;
        for (std::size_t i = 0; i < dist.size() && i < static_cast<std::size_t>(k); ++i)
            mass += dist[i].second;
        sum += mass;
    }
    return sum / static_cast<double>(model.counts.size());
}

} // namespace autotool
