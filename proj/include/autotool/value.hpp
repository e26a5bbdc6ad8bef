#pragma once
// Closed parameter value set: string, number, boolean, list of strings.
// Kept closed so that "same value" stays decidable for dataflow backtracking.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace autotool {

using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

inline std::string trim_copy(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline const char* value_type_name(const Value& v) {
    switch (v.index()) {
        case 0: return "string";
        case 1: return "number";
        case 2: return "boolean";
        default: return "string_list";
    }
}

/// Equality on the closed value set, strings compared after trimming.
inline bool values_equal(const Value& a, const Value& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<std::string>(a))
        return trim_copy(std::get<std::string>(a)) == trim_copy(std::get<std::string>(b));
    if (std::holds_alternative<std::vector<std::string>>(a)) {
        const auto& la = std::get<std::vector<std::string>>(a);
        const auto& lb = std::get<std::vector<std::string>>(b);
        if (la.size() != lb.size()) return false;
        for (std::size_t i = 0; i < la.size(); ++i)
            if (trim_copy(la[i]) != trim_copy(lb[i])) return false;
        return true;
    }
    return a == b;
}

/// Dataflow match: exact equality, or scalar-in-list when the source is a list.
inline bool value_matches_source(const Value& target, const Value& source) {
    if (values_equal(target, source)) return true;
    if (std::holds_alternative<std::vector<std::string>>(source) &&
        std::holds_alternative<std::string>(target)) {
        const auto t = trim_copy(std::get<std::string>(target));
        for (const auto& e : std::get<std::vector<std::string>>(source))
            if (trim_copy(e) == t) return true;
    }
    return false;
}

/// Canonical key used for used-value bookkeeping and LRU caches.
inline std::string value_key(const Value& v) {
    switch (v.index()) {
        case 0: return "s:" + trim_copy(std::get<std::string>(v));
        case 1: {
            std::ostringstream os;
            os << "n:" << std::get<double>(v);
            return os.str();
        }
        case 2: return std::get<bool>(v) ? "b:true" : "b:false";
        default: {
            std::string key = "l:";
            for (const auto& e : std::get<std::vector<std::string>>(v))
                key += trim_copy(e) + "\x1f";
            return key;
        }
    }
}

inline nlohmann::json value_to_json(const Value& v) {
    switch (v.index()) {
        case 0: return std::get<std::string>(v);
        case 1: {
            double d = std::get<double>(v);
            if (std::floor(d) == d && std::abs(d) < 1e15)
                return static_cast<std::int64_t>(d);
            return d;
        }
        case 2: return std::get<bool>(v);
        default: return std::get<std::vector<std::string>>(v);
    }
}

inline Value value_from_json(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number()) return j.get<double>();
    if (j.is_array()) {
        std::vector<std::string> items;
        for (const auto& e : j) {
            if (!e.is_string()) throw SchemaError("unsupported value type: list elements must be strings");
            items.push_back(e.get<std::string>());
        }
        return items;
    }
    throw SchemaError("unsupported value type");
}

/// Coerce a value to a declared type tag ("string", "number", "boolean",
/// "string_list", or "" for untyped). String<->number only when lossless.
inline std::optional<Value> coerce_to_tag(const Value& v, const std::string& tag) {
    if (tag.empty() || tag == value_type_name(v)) return v;
    if (tag == "string" && std::holds_alternative<double>(v)) {
        return std::string(value_to_json(v).dump());
    }
    if (tag == "number" && std::holds_alternative<std::string>(v)) {
        const std::string s = trim_copy(std::get<std::string>(v));
        if (s.empty()) return std::nullopt;
        char* end = nullptr;
        double d = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) return std::nullopt;
        return d;
    }
    return std::nullopt;
}

} // namespace autotool
