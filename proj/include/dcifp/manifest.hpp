#pragma once

#include <map>
#include <string>
#include <vector>

namespace dcifp {

// Provenance record emitted by every CLI run: the exact invocation,
// resolved parameters, and content digests of all file inputs/outputs.
// Re-running `argv` from the same working directory must reproduce every
// output digest for deterministic stages (that is what --replay checks).
struct RunManifest {
    std::string subcommand;
    std::vector<std::string> argv;               // subcommand first, then flags
    std::map<std::string, std::string> params;   // resolved values incl. defaults
    std::map<std::string, std::string> inputs;   // path -> fnv1a64 content digest
    std::map<std::string, std::string> outputs;  // path -> fnv1a64 content digest
    int threads = 1;
    double wall_seconds = 0;
    std::string created;  // UTC timestamp (informational; excluded from replay compare)
};

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

std::string utc_timestamp_now();

}  // namespace dcifp
