#pragma once
// Contextual relevance scoring between the agent's intuition text and a
// candidate tool description. The default is a deterministic lexical
// term-frequency cosine; embedding-backed scorers can drop in behind the
// same interface.

#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace autotool {

struct RelevanceScorer {
    virtual ~RelevanceScorer() = default;
    /// Returns a score in [0, 1]; must be deterministic for fixed inputs.
    virtual double score(const std::string& intuition,
                         const std::string& tool_description) const = 0;
};

inline std::vector<std::string> tokenize_lower(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

class LexicalCosineScorer final : public RelevanceScorer {
public:
    double score(const std::string& intuition,
                 const std::string& tool_description) const override {
        const auto a = term_freqs(intuition);
        const auto b = term_freqs(tool_description);
        if (a.empty() || b.empty()) return 0.0;
        double dot = 0.0;
        for (const auto& [term, fa] : a) {
            auto it = b.find(term);
            if (it != b.end()) dot += fa * it->second;
        }
        const double denom = norm(a) * norm(b);
        return denom > 0.0 ? dot / denom : 0.0;
    }

private:
    static std::map<std::string, double> term_freqs(const std::string& text) {
        std::map<std::string, double> tf;
        for (const auto& tok : tokenize_lower(text)) tf[tok] += 1.0;
        return tf;
    }

    static double norm(const std::map<std::string, double>& tf) {
        double sq = 0.0;
        for (const auto& [term, f] : tf) {
            (void)term;
            sq += f * f;
        }
        return std::sqrt(sq);
    }
};

} // namespace autotool
