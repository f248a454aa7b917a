#pragma once

#include <optional>

#include "dcifp/trace_io.hpp"

namespace dcifp {

inline constexpr int kNumFeatures = 3;
inline constexpr uint32_t kDefaultBurstGapMs = 1000;  // bursts are sub-second

// Per-DCI model input: (direction, TBS, inter-arrival time), fixed unit
// conventions only — no data-dependent normalization.
struct FeatureRow {
    double direction_code = 0;  // 0 = DL, 1 = UL
    double tbs_kb = 0;          // transport block size, kilobits
    double dt_s = 0;            // gap to previous captured instance, seconds

    bool operator==(const FeatureRow&) const = default;
};

// One classification sample: exactly W consecutive captured instances.
struct WindowSample {
    std::vector<FeatureRow> rows;
    std::optional<AppLabel> label;
    uint16_t rnti = 0;
    uint64_t t_start_ms = 0, t_end_ms = 0;

    bool operator==(const WindowSample&) const = default;
};

// One feature row per record, in arrival order. Row i's dt is measured
// from record i-1; the first row gets dt = 0. Throws on unsorted input.
std::vector<FeatureRow> extract_features(const std::vector<DciRecord>& records);

// Sliding windows of length W at the given stride over one RNTI's rows.
// A window is dropped iff every in-window gap is below burst_gap_ms —
// i.e. it never leaves a single burst and carries no rhythm information.
// `times_ms` must parallel `rows` (used for window bounds); label/rnti are
// stamped onto every emitted sample.
std::vector<WindowSample> build_windows(const std::vector<FeatureRow>& rows,
                                        const std::vector<uint64_t>& times_ms, size_t W,
                                        size_t stride, uint32_t burst_gap_ms,
                                        const std::optional<AppLabel>& label, uint16_t rnti);

// Convenience: single-RNTI trace -> windows (extract + build).
// Throws if the trace mixes RNTIs (callers demultiplex first).
std::vector<WindowSample> windows_from_trace(const Trace& trace, size_t W, size_t stride,
                                             uint32_t burst_gap_ms = kDefaultBurstGapMs);

// Seconds spanned by each consecutive W-instance window (stride = W),
// with no burst exclusion: this measures how long a classifier waits for
// a full window, which is defined for every window position.
std::vector<double> time_to_fill(const Trace& trace, size_t W);

// Dataset file I/O. Line format, after `# key=value` metadata lines
// (window, stride, burst_gap_ms): one `label,rnti,t_start_ms,t_end_ms`
// header per sample followed by W rows `dir,tbs_kb,dt_s`.
struct Dataset {
    size_t W = 0;
    size_t stride = 0;
    uint32_t burst_gap_ms = kDefaultBurstGapMs;
    std::vector<WindowSample> samples;

    bool operator==(const Dataset&) const = default;
};

Dataset read_dataset_file(const std::string& path);
void write_dataset_file(const std::string& path, const Dataset& ds);

}  // namespace dcifp
