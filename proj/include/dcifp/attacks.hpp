#pragma once

#include <map>
#include <optional>
#include <set>

#include "dcifp/train.hpp"

namespace dcifp {

// Detection thresholds in resource blocks per second, one per DCI stream.
// A window's rate is (sum of rb_count)/detect_window_s; by default a
// window counts as a hit when EITHER stream exceeds its threshold (the
// more sensitive reading; set require_both for the conjunction).
struct SignatureThresholds {
    double rb_per_s_ul = 5000;   // F0_0 (uplink grants)
    double rb_per_s_dl = 10000;  // F1_0 (downlink assignments)
    bool require_both = false;

    bool operator==(const SignatureThresholds&) const = default;
};

// Attacker-crafted traffic signature: n_bursts payload bursts separated
// by the given gaps. Default pattern: five 10 s gaps and one 20 s gap.
struct SignatureSpec {
    size_t n_bursts = 7;
    std::vector<double> intervals_s = {10, 10, 10, 10, 10, 20};  // n_bursts-1 gaps
    double burst_bytes = 4.0 * 1024 * 1024;                      // payload per burst
    double detect_window_s = 2.0;  // seconds inspected after each burst
    SignatureThresholds thresholds;

    bool operator==(const SignatureSpec&) const = default;
};

// Enforces burst_bytes > 100 KiB, positive intervals of length
// n_bursts-1, and positive thresholds/window.
void validate_signature(const SignatureSpec& spec);

// Burst start offsets from t0 in ms: 0, then cumulative interval sums.
std::vector<double> burst_offsets_ms(const SignatureSpec& spec);

// Key=value config file (n_bursts, intervals_s, burst_bytes,
// detect_window_s, rb_per_s_ul, rb_per_s_dl, require_both). read accepts
// everything write emits.
SignatureSpec read_signature_file(const std::string& path);
void write_signature_file(const std::string& path, const SignatureSpec& spec);

// Insert the signature's scheduling records for target_rnti into a cell
// trace, bursts starting at t0_ms. Payload converts to DL assignments
// (plus sparse acknowledging UL grants) spread over <1 s per burst. When
// the attacker knows the sniffer's capture ratio, bursts are oversized by
// its inverse so the captured remainder still clears the thresholds.
// Deterministic in seed. t0 must lie within a non-empty trace's span.
Trace inject_signature(const Trace& cell_trace, uint16_t target_rnti, const SignatureSpec& spec,
                       double t0_ms, uint64_t seed,
                       std::optional<double> capture_estimate = std::nullopt);

struct HuntResult {
    std::map<uint16_t, size_t> candidates;       // rnti -> bursts hit (>=1)
    std::vector<std::set<uint16_t>> burst_hits;  // per burst: rntis over threshold
    size_t full_pattern_count = 0;               // rntis hitting every burst
    std::optional<uint16_t> unique_target;       // set iff full_pattern_count == 1
};

// For each burst time (attacker-known schedule), rate per RNTI and stream
// inside [t_k, t_k + detect_window_s) is compared against the thresholds.
HuntResult detect_target(const Trace& captured, const SignatureSpec& spec, double t0_ms);

std::string format_hunt_result(const HuntResult& result, const SignatureSpec& spec);

// Cell-wide fingerprinting scan output.
struct ScanSegment {
    uint64_t t_start_ms = 0, t_end_ms = 0;  // first/last classification instant
    AppLabel label;
    double mean_confidence = 0;
    size_t n_windows = 0;
};

struct RntiTimeline {
    uint16_t rnti = 0;
    bool seen = false;
    uint64_t first_seen_ms = 0, last_seen_ms = 0;
    size_t n_records = 0;
    std::vector<ScanSegment> segments;  // time-ordered, non-overlapping
};

struct ScanReport {
    size_t W = 0;
    double min_confidence = 0;
    std::vector<RntiTimeline> per_rnti;  // ordered by RNTI
    // distinct RNTIs with any DCI activity, per whole second of trace time
    std::vector<std::pair<uint64_t, uint32_t>> active_per_second;
};

// Demultiplex by RNTI and stream stride-1 windows through the classifier.
// A window joins the open segment when its label matches, its confidence
// reaches min_confidence, and no more than segment_split_ms passed since
// the previous retained window; otherwise the segment closes. RNTIs with
// fewer than W captured instances appear with an empty timeline. W is the
// bundle's window size.
ScanReport cell_scan(const Trace& captured, const ModelBundle& bundle, double min_confidence,
                     const ExecConfig& exec = {}, uint64_t segment_split_ms = 30000);

// cell_scan restricted to one RNTI; an absent RNTI yields a single
// timeline entry with seen = false.
ScanReport track_target(const Trace& captured, uint16_t rnti, const ModelBundle& bundle,
                        double min_confidence, const ExecConfig& exec = {},
                        uint64_t segment_split_ms = 30000);

std::string format_scan_report(const ScanReport& report);
// rnti,t_start_ms,t_end_ms,label,mean_confidence,n_windows
std::string format_scan_csv(const ScanReport& report);
// second,active_rntis
std::string format_activity_csv(const ScanReport& report);

}  // namespace dcifp
