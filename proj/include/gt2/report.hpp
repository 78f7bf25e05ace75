// Report envelopes and serialization. JSON output uses canonical
// (lexicographically sorted) key order so identical configurations produce
// byte-identical payloads; CSV is restricted to flat numeric tables and is
// rejected (validation error) for nested payloads.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gt2/common.hpp"

namespace gt2 {

using json = nlohmann::json;  // std::map-backed: keys serialize sorted

struct ReportEnvelope {
    std::string tool = "gt2";
    std::string version = "1.0.0";
    std::string command;
    json config;  // echo of the run configuration
    double timing_ms = 0.0;
    std::vector<std::string> provenance;
    json payload;

    json to_json(bool with_timing = true) const {
        json j;
        j["tool"] = tool;
        j["version"] = version;
        j["command"] = command;
        j["config"] = config;
        if (with_timing) j["timing_ms"] = timing_ms;
        j["provenance"] = provenance;
        j["payload"] = payload;
        return j;
    }
};

// A payload is CSV-friendly when it is {"columns": [...names...],
// "rows": [[numbers...], ...]}. Everything else must go through JSON.
inline bool csv_compatible(const json& payload) {
    if (!payload.is_object() || !payload.contains("columns") || !payload.contains("rows"))
        return false;
    if (!payload["columns"].is_array() || !payload["rows"].is_array()) return false;
    for (const auto& row : payload["rows"]) {
        if (!row.is_array() || row.size() != payload["columns"].size()) return false;
        for (const auto& cell : row)
            if (!cell.is_number()) return false;
    }
    return true;
}

inline std::string payload_to_csv(const json& payload) {
    if (!csv_compatible(payload))
        throw ValidationError("CSV output requires a flat numeric table payload");
    std::string out;
    const auto& cols = payload["columns"];
    for (size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ",";
        out += cols[i].get<std::string>();
    }
    out += "\n";
    for (const auto& row : payload["rows"]) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += row[i].dump();
        }
        out += "\n";
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ResourceError("cannot write report to " + path);
    out << text;
    if (!out) throw ResourceError("short write to " + path);
}

}  // namespace gt2
