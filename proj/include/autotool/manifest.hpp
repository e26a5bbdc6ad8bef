#pragma once
// Run manifest: everything needed to reproduce a command's output. Emitted
// alongside every CLI command; identical manifests imply identical outputs.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace autotool {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

inline std::string file_digest(const std::string& path) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_file(path))));
    return buf;
}

struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::pair<std::string, std::string>> inputs; // (path, digest)
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;

    void add_input(const std::string& path) { inputs.emplace_back(path, file_digest(path)); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["command"] = command;
        j["config"] = config;
        j["seed"] = seed;
        j["tool_version"] = kToolVersion;
        j["inputs"] = nlohmann::json::array();
        for (const auto& [path, digest] : inputs)
            j["inputs"].push_back({{"path", path}, {"digest", digest}});
        j["outputs"] = outputs;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ArgumentError("cannot write manifest: " + path);
        out << to_json().dump(2) << "\n";
    }
};

} // namespace autotool
