#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "dcifp/dci.hpp"

namespace dcifp {

// Closed real interval [lo, hi].
struct Range {
    double lo = 0, hi = 0;
    double mid() const { return 0.5 * (lo + hi); }
    bool operator==(const Range&) const = default;
};

// Closed integer interval [lo, hi].
struct CountRange {
    uint32_t lo = 0, hi = 0;
    bool operator==(const CountRange&) const = default;
};

// log-normal over positive sizes, parameterized in log space
struct LogNormalSpec {
    double mu = 0, sigma = 0;
    bool operator==(const LogNormalSpec&) const = default;
};

enum class TrafficKind : uint8_t { BURST_STREAMING, CONTINUOUS_VOIP };

// Shape parameters for one application's radio-scheduling footprint.
// Streaming apps buffer in sub-second bursts separated by long gaps; VoIP
// apps schedule small packets continuously.
struct AppProfile {
    AppLabel name;
    TrafficKind kind = TrafficKind::BURST_STREAMING;
    Range burst_interval_s;        // gap between bursts (BURST_STREAMING)
    Range burst_duration_ms;       // burst span; hi must stay < 1000
    CountRange instances_per_burst;
    LogNormalSpec tbs_dl_bits;
    LogNormalSpec tbs_ul_bits;
    double ul_fraction = 0.2;      // share of instances that are uplink
    Range voip_period_ms;          // instance period (CONTINUOUS_VOIP)

    bool operator==(const AppProfile&) const = default;
};

// Throws on empty ranges, out-of-range fractions, or a streaming profile
// whose bursts could reach one second.
void validate_profile(const AppProfile& p);

// The default 8-app set, calibrated so capture + windowing downstream
// reproduce the published interval/latency orderings.
const std::map<AppLabel, AppProfile>& builtin_profiles();

// Human-editable profile config: "[Name]" section headers, key=value
// lines. read accepts everything write emits (round-trip identity).
std::map<AppLabel, AppProfile> read_profiles_file(const std::string& path);
void write_profiles_file(const std::string& path, const std::map<AppLabel, AppProfile>& profiles);

}  // namespace dcifp
