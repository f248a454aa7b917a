#pragma once

#include "dcifp/trace_io.hpp"

namespace dcifp {

// Lossy over-the-air capture model. Default: independent per-record
// Bernoulli keep with probability capture_prob. The optional two-state
// (good/bad) gilbert loss model adds time-correlated outages for
// robustness experiments; it preserves the long-run keep rate.
struct CaptureConfig {
    double capture_prob = 0.05;  // fraction of generated DCIs actually decoded
    uint64_t seed = 0;
    uint32_t jitter_ms = 0;      // max |timestamp perturbation| of kept records
    bool gilbert = false;        // correlated-loss variant, default off
    double gilbert_mean_bad_ms = 2000.0;  // mean outage length when enabled
};

void validate_capture_config(const CaptureConfig& cfg);

// Thin a ground-truth trace down to what a sniffer would decode.
// Deterministic under cfg.seed; sets meta.capture_ratio = capture_prob.
Trace apply_capture(const Trace& trace, const CaptureConfig& cfg);

// |captured| / |generated|; throws on an empty generated trace.
double estimate_capture_ratio(const Trace& generated, const Trace& captured);

}  // namespace dcifp
