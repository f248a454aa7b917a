#pragma once

#include "dcifp/metrics.hpp"
#include "dcifp/train.hpp"

namespace dcifp {

// Window-size sweep: train one model per W on labeled captured traces and
// evaluate on traces from a disjoint capture (the "unseen data" split is
// the caller's responsibility — pass traces generated with different
// seeds/periods).
struct SweepConfig {
    std::vector<size_t> windows = {20, 40, 60, 80, 100, 120, 140, 160};
    TrainConfig train;
    // per-class training-sample budget: full up to budget_ref_W, reduced
    // proportionally above it so total input volume stays bounded
    size_t samples_per_class = 1000;
    size_t budget_ref_W = 100;
    size_t eval_per_class = 250;
    uint32_t burst_gap_ms = kDefaultBurstGapMs;
};

size_t sweep_samples_per_class(const SweepConfig& cfg, size_t W);

struct SweepEntry {
    size_t W = 0;
    EvalReport report;
    size_t train_samples = 0, test_samples = 0;
    double train_seconds = 0, eval_seconds = 0;
    double final_val_accuracy = 0;
};

// Traces must carry labels; multi-RNTI traces are demultiplexed per RNTI
// before windowing (stride = W, disjoint windows).
std::vector<SweepEntry> window_sweep(const std::vector<Trace>& train_traces,
                                     const std::vector<Trace>& test_traces,
                                     const SweepConfig& cfg);

// One row per W with weighted-average Precision / Recall / F1 / Accuracy.
std::string format_sweep_table(const std::vector<SweepEntry>& entries);

// Windows grouped per label from labeled traces, capped per class — the
// sampling the sweep uses, exposed for dataset construction. stride 0
// means stride = W (disjoint windows); per_class 0 means uncapped.
std::vector<WindowSample> windows_per_class(const std::vector<Trace>& traces, size_t W,
                                            size_t stride, size_t per_class,
                                            uint32_t burst_gap_ms);

// Time to collect a full W-instance window, summarized per application.
struct LatencyRow {
    AppLabel app;
    size_t W = 0;
    size_t n = 0;  // measurements used (0 = trace too short; explicit empty row)
    double mean_s = 0, stddev_s = 0, min_s = 0, max_s = 0;
};

// Traces must carry labels; multi-RNTI traces are measured per RNTI and
// pooled per app. At most n_trials measurements per app are used.
std::vector<LatencyRow> classification_latency(const std::vector<Trace>& traces, size_t W,
                                               size_t n_trials);

// Aligned app-by-W table of mean +- stddev seconds (rows may span several
// W values) and a plot-ready CSV (app,W,n,mean_s,stddev_s,min_s,max_s).
std::string format_latency_table(const std::vector<LatencyRow>& rows);
std::string format_latency_csv(const std::vector<LatencyRow>& rows);

// Canonical display order: builtin apps first in their usual order, then
// unknown labels sorted.
std::vector<AppLabel> display_label_order(const std::vector<AppLabel>& labels);

}  // namespace dcifp
