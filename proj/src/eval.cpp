#include "dcifp/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

namespace dcifp {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::map<uint16_t, Trace> split_by_rnti(const Trace& trace) {
    std::map<uint16_t, Trace> out;
    for (const auto& r : trace.records) {
        Trace& t = out[r.rnti];
        if (t.records.empty()) t.meta = trace.meta;
        t.records.push_back(r);
    }
    return out;
}

const AppLabel& require_label(const Trace& trace, const char* op) {
    if (!trace.meta.label)
        throw std::runtime_error(std::string(op) + ": trace carries no label metadata");
    return *trace.meta.label;
}

// label -> windows, traces demultiplexed per RNTI; stride 0 = W
std::map<AppLabel, std::vector<WindowSample>> windows_by_label(const std::vector<Trace>& traces,
                                                               size_t W, size_t stride,
                                                               uint32_t burst_gap_ms,
                                                               const char* op) {
    std::map<AppLabel, std::vector<WindowSample>> buckets;
    for (const auto& trace : traces) {
        const AppLabel& label = require_label(trace, op);
        for (auto& [rnti, sub] : split_by_rnti(trace)) {
            auto windows = windows_from_trace(sub, W, stride == 0 ? W : stride, burst_gap_ms);
            auto& bucket = buckets[label];
            bucket.insert(bucket.end(), windows.begin(), windows.end());
        }
    }
    return buckets;
}

std::vector<WindowSample> flatten_capped(std::map<AppLabel, std::vector<WindowSample>>& buckets,
                                         size_t per_class) {
    std::vector<WindowSample> out;
    for (auto& [label, windows] : buckets) {
        size_t n = per_class > 0 ? std::min(per_class, windows.size()) : windows.size();
        out.insert(out.end(), windows.begin(), windows.begin() + static_cast<long>(n));
    }
    return out;
}

}  // namespace

size_t sweep_samples_per_class(const SweepConfig& cfg, size_t W) {
    if (W <= cfg.budget_ref_W || cfg.budget_ref_W == 0) return cfg.samples_per_class;
    double scaled = static_cast<double>(cfg.samples_per_class) *
                    static_cast<double>(cfg.budget_ref_W) / static_cast<double>(W);
    return std::max<size_t>(1, static_cast<size_t>(std::llround(scaled)));
}

std::vector<WindowSample> windows_per_class(const std::vector<Trace>& traces, size_t W,
                                            size_t stride, size_t per_class,
                                            uint32_t burst_gap_ms) {
    auto buckets = windows_by_label(traces, W, stride, burst_gap_ms, "windows_per_class");
    return flatten_capped(buckets, per_class);
}

std::vector<SweepEntry> window_sweep(const std::vector<Trace>& train_traces,
                                     const std::vector<Trace>& test_traces,
                                     const SweepConfig& cfg) {
    if (cfg.windows.empty()) throw std::runtime_error("window_sweep: empty window list");
    if (train_traces.empty() || test_traces.empty())
        throw std::runtime_error("window_sweep: train and test trace sets must be non-empty");

    std::vector<SweepEntry> entries;
    for (size_t W : cfg.windows) {
        SweepEntry e;
        e.W = W;

        auto t0 = std::chrono::steady_clock::now();
        auto train_buckets =
            windows_by_label(train_traces, W, W, cfg.burst_gap_ms, "window_sweep");
        auto train_set = flatten_capped(train_buckets, sweep_samples_per_class(cfg, W));
        e.train_samples = train_set.size();
        ModelBundle bundle = train(train_set, cfg.train, std::nullopt, cfg.burst_gap_ms);
        e.train_seconds = seconds_since(t0);
        e.final_val_accuracy = bundle.final_val_accuracy();

        t0 = std::chrono::steady_clock::now();
        auto test_buckets =
            windows_by_label(test_traces, W, W, cfg.burst_gap_ms, "window_sweep");
        auto test_set = flatten_capped(test_buckets, cfg.eval_per_class);
        e.test_samples = test_set.size();
        if (test_set.empty()) throw std::runtime_error("window_sweep: no test windows");
        auto preds = predict_batch(bundle, test_set, cfg.train.exec);
        std::vector<AppLabel> truth, predicted;
        truth.reserve(test_set.size());
        predicted.reserve(test_set.size());
        for (size_t i = 0; i < test_set.size(); ++i) {
            truth.push_back(*test_set[i].label);
            predicted.push_back(bundle.class_order[preds[i].class_index]);
        }
        e.report = compute_metrics(truth, predicted, bundle.class_order);
        e.report.W = W;
        e.eval_seconds = seconds_since(t0);
        entries.push_back(std::move(e));
    }
    return entries;
}

std::string format_sweep_table(const std::vector<SweepEntry>& entries) {
    std::string out =
        "   W  Precision  Recall     F1         Accuracy   (weighted averages)\n";
    char buf[160];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof(buf), "%4zu  %-9.4f  %-9.4f  %-9.4f  %-9.4f\n", e.W,
                      e.report.weighted_precision, e.report.weighted_recall,
                      e.report.weighted_f1, e.report.accuracy);
        out += buf;
    }
    return out;
}

std::vector<AppLabel> display_label_order(const std::vector<AppLabel>& labels) {
    std::set<AppLabel> seen(labels.begin(), labels.end());
    std::vector<AppLabel> out;
    for (const auto& known : default_app_labels())
        if (seen.erase(known)) out.push_back(known);
    out.insert(out.end(), seen.begin(), seen.end());
    return out;
}

std::vector<LatencyRow> classification_latency(const std::vector<Trace>& traces, size_t W,
                                               size_t n_trials) {
    if (n_trials < 1) throw std::runtime_error("classification_latency: n_trials must be >= 1");
    if (W < 2) throw std::runtime_error("classification_latency: W must be >= 2");
    std::map<AppLabel, std::vector<double>> fills;
    for (const auto& trace : traces) {
        const AppLabel& label = require_label(trace, "classification_latency");
        auto& bucket = fills[label];  // app present even if no window fills
        for (auto& [rnti, sub] : split_by_rnti(trace)) {
            auto f = time_to_fill(sub, W);
            bucket.insert(bucket.end(), f.begin(), f.end());
        }
    }

    std::vector<AppLabel> labels;
    labels.reserve(fills.size());
    for (const auto& [label, f] : fills) labels.push_back(label);

    std::vector<LatencyRow> rows;
    for (const auto& label : display_label_order(labels)) {
        auto& f = fills[label];
        if (f.size() > n_trials) f.resize(n_trials);
        LatencyRow row;
        row.app = label;
        row.W = W;
        row.n = f.size();
        if (!f.empty()) {
            double sum = 0;
            row.min_s = row.max_s = f[0];
            for (double v : f) {
                sum += v;
                row.min_s = std::min(row.min_s, v);
                row.max_s = std::max(row.max_s, v);
            }
            row.mean_s = sum / static_cast<double>(f.size());
            if (f.size() > 1) {
                double ss = 0;
                for (double v : f) ss += (v - row.mean_s) * (v - row.mean_s);
                row.stddev_s = std::sqrt(ss / static_cast<double>(f.size() - 1));
            }
        }
        rows.push_back(row);
    }
    return rows;
}

std::string format_latency_table(const std::vector<LatencyRow>& rows) {
    std::vector<size_t> windows;
    std::vector<AppLabel> apps;
    for (const auto& r : rows) {
        if (std::find(windows.begin(), windows.end(), r.W) == windows.end())
            windows.push_back(r.W);
        if (std::find(apps.begin(), apps.end(), r.app) == apps.end()) apps.push_back(r.app);
    }
    std::sort(windows.begin(), windows.end());

    char buf[160];
    std::string out = "fill time, seconds (mean +- stddev)\n";
    out += "app         ";
    for (size_t W : windows) {
        std::snprintf(buf, sizeof(buf), "  W=%-14zu", W);
        out += buf;
    }
    out += "\n";
    for (const auto& app : apps) {
        std::snprintf(buf, sizeof(buf), "%-12s", app.c_str());
        out += buf;
        for (size_t W : windows) {
            auto it = std::find_if(rows.begin(), rows.end(), [&](const LatencyRow& r) {
                return r.app == app && r.W == W;
            });
            if (it == rows.end() || it->n == 0) {
                out += "  -               ";
            } else {
                std::snprintf(buf, sizeof(buf), "  %7.2f +-%6.2f ", it->mean_s, it->stddev_s);
                out += buf;
            }
        }
        out += "\n";
    }
    return out;
}

std::string format_latency_csv(const std::vector<LatencyRow>& rows) {
    std::string out = "app,W,n,mean_s,stddev_s,min_s,max_s\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%.6f,%.6f,%.6f,%.6f\n", r.app.c_str(), r.W,
                      r.n, r.mean_s, r.stddev_s, r.min_s, r.max_s);
        out += buf;
    }
    return out;
}

}  // namespace dcifp
