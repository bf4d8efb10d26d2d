#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "bevtraj/errors.hpp"

namespace bevtraj {

// FNV-1a, 64-bit; good enough to detect artifact drift between runs.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for checksumming");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

inline std::string checksum_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Written before long-running work starts; rewritten on completion with one
// checksum per output artifact.
struct RunManifest {
    std::string command;
    nlohmann::ordered_json resolved_config;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::pair<std::string, std::string>> outputs;   // path, checksum
    std::string started_at;
    std::string finished_at;

    std::string path;

    static std::string now_utc() {
        const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    void write() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["resolved_config"] = resolved_config;
        j["seed"] = seed;
        j["inputs"] = inputs;
        nlohmann::ordered_json outs = nlohmann::ordered_json::array();
        for (const auto& [p, sum] : outputs) outs.push_back({{"path", p}, {"checksum_fnv1a64", sum}});
        j["outputs"] = std::move(outs);
        j["started_at"] = started_at;
        if (!finished_at.empty()) j["finished_at"] = finished_at;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("cannot open manifest '" + path + "' for writing");
        out << j.dump(2) << '\n';
    }

    void begin() {
        started_at = now_utc();
        write();
    }

    void add_output(const std::string& artifact_path) {
        outputs.emplace_back(artifact_path, checksum_hex(fnv1a64_file(artifact_path)));
    }

    void finish() {
        finished_at = now_utc();
        write();
    }
};

} // namespace bevtraj
