#include "dcifp/manifest.hpp"

#include <ctime>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace dcifp {

void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::json j;
    j["subcommand"] = m.subcommand;
    j["argv"] = m.argv;
    j["params"] = m.params;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["threads"] = m.threads;
    j["wall_seconds"] = m.wall_seconds;
    j["created"] = m.created;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open manifest for write: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("manifest write failure: " + path);
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": manifest parse error: " + e.what());
    }
    RunManifest m;
    try {
        m.subcommand = j.at("subcommand").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        m.params = j.at("params").get<std::map<std::string, std::string>>();
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
        m.threads = j.value("threads", 1);
        m.wall_seconds = j.value("wall_seconds", 0.0);
        m.created = j.value("created", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": manifest field error: " + e.what());
    }
    return m;
}

std::string utc_timestamp_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace dcifp
