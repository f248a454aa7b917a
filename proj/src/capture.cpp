#include "dcifp/capture.hpp"

#include <algorithm>
#include <cmath>

#include "dcifp/rng.hpp"

namespace dcifp {

void validate_capture_config(const CaptureConfig& cfg) {
    if (!(cfg.capture_prob > 0.0 && cfg.capture_prob <= 1.0))
        throw std::runtime_error("capture_prob must be in (0, 1]");
    if (cfg.gilbert && cfg.capture_prob > 0.5)
        throw std::runtime_error("gilbert loss model requires capture_prob <= 0.5");
    if (cfg.gilbert && !(cfg.gilbert_mean_bad_ms > 0))
        throw std::runtime_error("gilbert_mean_bad_ms must be positive");
}

Trace apply_capture(const Trace& trace, const CaptureConfig& cfg) {
    validate_capture_config(cfg);
    Rng rng(mix_seed(cfg.seed, 0xCA97));
    Trace out;
    out.meta = trace.meta;
    out.meta.capture_ratio = cfg.capture_prob;

    // Gilbert variant: alternate exponentially-sized good/bad spans with
    // equal mean; nothing decodes in bad spans, so good spans keep at
    // 2*capture_prob to preserve the long-run ratio.
    bool good = true;
    double next_flip_ms = 0.0;
    if (cfg.gilbert) {
        good = rng.bernoulli(0.5);
        next_flip_ms = -cfg.gilbert_mean_bad_ms * std::log(1.0 - rng.uniform01());
    }
    for (const DciRecord& r : trace.records) {
        bool keep;
        if (cfg.gilbert) {
            while (static_cast<double>(r.t_ms) >= next_flip_ms) {
                good = !good;
                next_flip_ms += -cfg.gilbert_mean_bad_ms * std::log(1.0 - rng.uniform01());
            }
            keep = good && rng.bernoulli(2.0 * cfg.capture_prob);
        } else {
            keep = rng.bernoulli(cfg.capture_prob);
        }
        if (!keep) continue;
        DciRecord kept = r;
        if (cfg.jitter_ms > 0) {
            int64_t off = static_cast<int64_t>(rng.uniform_int(0, 2ull * cfg.jitter_ms)) -
                          static_cast<int64_t>(cfg.jitter_ms);
            int64_t t = static_cast<int64_t>(kept.t_ms) + off;
            kept.t_ms = t < 0 ? 0 : static_cast<uint64_t>(t);
        }
        out.records.push_back(kept);
    }
    if (cfg.jitter_ms > 0)
        std::stable_sort(out.records.begin(), out.records.end(),
                         [](const DciRecord& a, const DciRecord& b) { return a.t_ms < b.t_ms; });
    return out;
}

double estimate_capture_ratio(const Trace& generated, const Trace& captured) {
    if (generated.records.empty())
        throw std::runtime_error("estimate_capture_ratio: empty generated trace");
    return static_cast<double>(captured.records.size()) /
           static_cast<double>(generated.records.size());
}

}  // namespace dcifp
