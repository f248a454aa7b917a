#include "dcifp/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dcifp/rng.hpp"

namespace dcifp {
namespace {

constexpr double kBurstSpreadMs = 900.0;   // payload burst span, < detect window
constexpr double kInjectDlTbsBits = 120000.0;  // aggregated full-buffer assignment
constexpr double kInjectUlTbsBits = 1200.0;    // acknowledgement-sized grant

uint32_t rb_for_tbs(double tbs_bits, Rng& rng) {
    double bits_per_rb = 800.0 * rng.uniform(0.75, 1.25);
    long long rb = std::llround(tbs_bits / bits_per_rb);
    return static_cast<uint32_t>(std::max(1LL, rb));
}

std::vector<DciRecord>::const_iterator first_at_or_after(const std::vector<DciRecord>& recs,
                                                         uint64_t t_ms) {
    return std::lower_bound(recs.begin(), recs.end(), t_ms,
                            [](const DciRecord& r, uint64_t t) { return r.t_ms < t; });
}

}  // namespace

void validate_signature(const SignatureSpec& spec) {
    if (spec.n_bursts < 1) throw std::runtime_error("signature: n_bursts must be >= 1");
    if (spec.intervals_s.size() + 1 != spec.n_bursts)
        throw std::runtime_error("signature: need n_bursts-1 intervals, got " +
                                 std::to_string(spec.intervals_s.size()));
    for (double g : spec.intervals_s)
        if (!(g > 0)) throw std::runtime_error("signature: intervals must be positive");
    if (!(spec.burst_bytes > 100.0 * 1024.0))
        throw std::runtime_error("signature: burst_bytes must exceed 100 KiB");
    if (!(spec.detect_window_s > 0))
        throw std::runtime_error("signature: detect_window_s must be positive");
    if (!(spec.thresholds.rb_per_s_ul > 0) || !(spec.thresholds.rb_per_s_dl > 0))
        throw std::runtime_error("signature: thresholds must be positive");
}

std::vector<double> burst_offsets_ms(const SignatureSpec& spec) {
    std::vector<double> offsets = {0.0};
    for (double g : spec.intervals_s) offsets.push_back(offsets.back() + g * 1000.0);
    return offsets;
}

SignatureSpec read_signature_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open signature file: " + path);
    SignatureSpec spec;
    spec.intervals_s.clear();
    bool have_intervals = false;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        try {
            if (key == "n_bursts") {
                spec.n_bursts = std::stoul(value);
            } else if (key == "intervals_s") {
                spec.intervals_s.clear();
                std::stringstream ss(value);
                std::string tok;
                while (std::getline(ss, tok, ',')) spec.intervals_s.push_back(std::stod(tok));
                have_intervals = true;
            } else if (key == "burst_bytes") {
                spec.burst_bytes = std::stod(value);
            } else if (key == "detect_window_s") {
                spec.detect_window_s = std::stod(value);
            } else if (key == "rb_per_s_ul") {
                spec.thresholds.rb_per_s_ul = std::stod(value);
            } else if (key == "rb_per_s_dl") {
                spec.thresholds.rb_per_s_dl = std::stod(value);
            } else if (key == "require_both") {
                if (value != "true" && value != "false")
                    throw std::runtime_error("expected true/false");
                spec.thresholds.require_both = value == "true";
            } else {
                throw std::runtime_error("unknown key '" + key + "'");
            }
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad value for " +
                                     key);
        }
    }
    if (!have_intervals)
        throw std::runtime_error(path + ": missing intervals_s");
    validate_signature(spec);
    return spec;
}

void write_signature_file(const std::string& path, const SignatureSpec& spec) {
    validate_signature(spec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open signature file for write: " + path);
    char buf[64];
    out << "n_bursts=" << spec.n_bursts << "\n";
    out << "intervals_s=";
    for (size_t i = 0; i < spec.intervals_s.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", spec.intervals_s[i]);
        out << (i ? "," : "") << buf;
    }
    out << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", spec.burst_bytes);
    out << "burst_bytes=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", spec.detect_window_s);
    out << "detect_window_s=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", spec.thresholds.rb_per_s_ul);
    out << "rb_per_s_ul=" << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", spec.thresholds.rb_per_s_dl);
    out << "rb_per_s_dl=" << buf << "\n";
    out << "require_both=" << (spec.thresholds.require_both ? "true" : "false") << "\n";
    if (!out) throw std::runtime_error("signature write failure: " + path);
}

Trace inject_signature(const Trace& cell_trace, uint16_t target_rnti, const SignatureSpec& spec,
                       double t0_ms, uint64_t seed, std::optional<double> capture_estimate) {
    validate_signature(spec);
    if (t0_ms < 0) throw std::runtime_error("inject_signature: t0 must be non-negative");
    if (!cell_trace.records.empty()) {
        double first = static_cast<double>(cell_trace.records.front().t_ms);
        double last = static_cast<double>(cell_trace.records.back().t_ms);
        if (t0_ms < first || t0_ms > last)
            throw std::runtime_error("inject_signature: t0 outside trace span");
    }
    double oversize = 1.0;
    if (capture_estimate) {
        if (!(*capture_estimate > 0) || *capture_estimate > 1.0)
            throw std::runtime_error("inject_signature: capture estimate must be in (0,1]");
        oversize = 1.0 / *capture_estimate;
    }

    Trace out = cell_trace;
    const auto offsets = burst_offsets_ms(spec);
    const double total_bits = spec.burst_bytes * 8.0 * oversize;
    for (size_t k = 0; k < offsets.size(); ++k) {
        Rng rng(mix_seed(seed, 0xB000 + k));
        const double t_k = t0_ms + offsets[k];
        double sent_bits = 0;
        size_t n_dl = 0;
        while (sent_bits < total_bits) {
            DciRecord r;
            r.t_ms = static_cast<uint64_t>(std::llround(t_k + rng.uniform(0.0, kBurstSpreadMs)));
            r.rnti = target_rnti;
            r.dci_format = DciFormat::F1_0;
            r.direction = Direction::DL;
            double tbs = rng.lognormal(std::log(kInjectDlTbsBits), 0.2);
            r.tbs_bits = static_cast<uint64_t>(std::max(1.0, std::round(tbs)));
            r.rb_count = rb_for_tbs(tbs, rng);
            sent_bits += static_cast<double>(r.tbs_bits);
            out.records.push_back(r);
            ++n_dl;
        }
        for (size_t u = 0; u < std::max<size_t>(1, n_dl / 4); ++u) {
            DciRecord r;
            r.t_ms = static_cast<uint64_t>(std::llround(t_k + rng.uniform(0.0, kBurstSpreadMs)));
            r.rnti = target_rnti;
            r.dci_format = DciFormat::F0_0;
            r.direction = Direction::UL;
            double tbs = rng.lognormal(std::log(kInjectUlTbsBits), 0.3);
            r.tbs_bits = static_cast<uint64_t>(std::max(1.0, std::round(tbs)));
            r.rb_count = rb_for_tbs(tbs, rng);
            out.records.push_back(r);
        }
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const DciRecord& a, const DciRecord& b) { return a.t_ms < b.t_ms; });
    return out;
}

HuntResult detect_target(const Trace& captured, const SignatureSpec& spec, double t0_ms) {
    validate_signature(spec);
    HuntResult result;
    const auto offsets = burst_offsets_ms(spec);
    const double window_ms = spec.detect_window_s * 1000.0;
    result.burst_hits.resize(offsets.size());
    for (size_t k = 0; k < offsets.size(); ++k) {
        const double t_k = t0_ms + offsets[k];
        const auto begin = first_at_or_after(captured.records,
                                             static_cast<uint64_t>(std::llround(t_k)));
        const auto end = first_at_or_after(captured.records,
                                           static_cast<uint64_t>(std::llround(t_k + window_ms)));
        std::map<uint16_t, std::pair<double, double>> rb;  // rnti -> (ul, dl) RB sums
        for (auto it = begin; it != end; ++it) {
            auto& [ul, dl] = rb[it->rnti];
            if (it->dci_format == DciFormat::F0_0)
                ul += it->rb_count;
            else
                dl += it->rb_count;
        }
        for (const auto& [rnti, sums] : rb) {
            const bool ul_hit = sums.first / spec.detect_window_s >= spec.thresholds.rb_per_s_ul;
            const bool dl_hit = sums.second / spec.detect_window_s >= spec.thresholds.rb_per_s_dl;
            const bool hit = spec.thresholds.require_both ? (ul_hit && dl_hit)
                                                          : (ul_hit || dl_hit);
            if (hit) {
                result.burst_hits[k].insert(rnti);
                ++result.candidates[rnti];
            }
        }
    }
    uint16_t full = 0;
    for (const auto& [rnti, hits] : result.candidates)
        if (hits == spec.n_bursts) {
            ++result.full_pattern_count;
            full = rnti;
        }
    if (result.full_pattern_count == 1) result.unique_target = full;
    return result;
}

std::string format_hunt_result(const HuntResult& result, const SignatureSpec& spec) {
    char buf[128];
    std::string out;
    std::snprintf(buf, sizeof(buf), "bursts=%zu candidates=%zu full_pattern=%zu\n", spec.n_bursts,
                  result.candidates.size(), result.full_pattern_count);
    out += buf;
    if (result.unique_target) {
        std::snprintf(buf, sizeof(buf), "unique_target=%s\n",
                      rnti_hex(*result.unique_target).c_str());
        out += buf;
    } else {
        out += "unique_target=none\n";
    }
    for (const auto& [rnti, hits] : result.candidates) {
        std::snprintf(buf, sizeof(buf), "  %s: %zu/%zu bursts\n", rnti_hex(rnti).c_str(), hits,
                      spec.n_bursts);
        out += buf;
    }
    return out;
}

ScanReport cell_scan(const Trace& captured, const ModelBundle& bundle, double min_confidence,
                     const ExecConfig& exec, uint64_t segment_split_ms) {
    if (min_confidence < 0 || min_confidence > 1)
        throw std::runtime_error("cell_scan: min_confidence must be in [0,1]");
    const size_t W = bundle.net.spec().W;
    ScanReport report;
    report.W = W;
    report.min_confidence = min_confidence;

    std::map<uint16_t, std::vector<DciRecord>> per_rnti;
    std::map<uint64_t, std::set<uint16_t>> active;
    for (const auto& r : captured.records) {
        per_rnti[r.rnti].push_back(r);
        active[r.t_ms / 1000].insert(r.rnti);
    }
    for (const auto& [second, rntis] : active)
        report.active_per_second.emplace_back(second, static_cast<uint32_t>(rntis.size()));

    for (auto& [rnti, records] : per_rnti) {
        RntiTimeline tl;
        tl.rnti = rnti;
        tl.seen = true;
        tl.first_seen_ms = records.front().t_ms;
        tl.last_seen_ms = records.back().t_ms;
        tl.n_records = records.size();

        if (records.size() >= W) {
            auto rows = extract_features(records);
            std::vector<uint64_t> times;
            times.reserve(records.size());
            for (const auto& r : records) times.push_back(r.t_ms);
            auto windows = build_windows(rows, times, W, 1, bundle.burst_gap_ms, std::nullopt,
                                         rnti);
            if (!windows.empty()) {
                auto preds = predict_batch(bundle, windows, exec);
                ScanSegment seg;
                bool open = false;
                double conf_sum = 0;
                auto close = [&]() {
                    if (!open) return;
                    seg.mean_confidence = conf_sum / static_cast<double>(seg.n_windows);
                    tl.segments.push_back(seg);
                    open = false;
                };
                for (size_t i = 0; i < windows.size(); ++i) {
                    const uint64_t instant = windows[i].t_end_ms;  // classification time
                    const auto& label = bundle.class_order[preds[i].class_index];
                    if (preds[i].confidence < min_confidence) {
                        close();
                        continue;
                    }
                    if (open && (label != seg.label ||
                                 instant - seg.t_end_ms > segment_split_ms))
                        close();
                    if (!open) {
                        seg = ScanSegment{instant, instant, label, 0, 0};
                        conf_sum = 0;
                        open = true;
                    }
                    seg.t_end_ms = instant;
                    conf_sum += preds[i].confidence;
                    ++seg.n_windows;
                }
                close();
            }
        }
        report.per_rnti.push_back(std::move(tl));
    }
    return report;
}

ScanReport track_target(const Trace& captured, uint16_t rnti, const ModelBundle& bundle,
                        double min_confidence, const ExecConfig& exec,
                        uint64_t segment_split_ms) {
    Trace filtered;
    filtered.meta = captured.meta;
    for (const auto& r : captured.records)
        if (r.rnti == rnti) filtered.records.push_back(r);
    if (filtered.records.empty()) {
        ScanReport report;
        report.W = bundle.net.spec().W;
        report.min_confidence = min_confidence;
        RntiTimeline tl;
        tl.rnti = rnti;
        tl.seen = false;
        report.per_rnti.push_back(tl);
        return report;
    }
    return cell_scan(filtered, bundle, min_confidence, exec, segment_split_ms);
}

std::string format_scan_report(const ScanReport& report) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "window=%zu min_confidence=%.2f rntis=%zu\n", report.W,
                  report.min_confidence, report.per_rnti.size());
    out += buf;
    uint32_t peak = 0;
    for (const auto& [second, n] : report.active_per_second) peak = std::max(peak, n);
    std::snprintf(buf, sizeof(buf), "active seconds=%zu peak concurrent rntis=%u\n",
                  report.active_per_second.size(), peak);
    out += buf;
    for (const auto& tl : report.per_rnti) {
        if (!tl.seen) {
            std::snprintf(buf, sizeof(buf), "RNTI %s: not seen\n", rnti_hex(tl.rnti).c_str());
            out += buf;
            continue;
        }
        std::snprintf(buf, sizeof(buf),
                      "RNTI %s: records=%zu span=[%.3f s, %.3f s] segments=%zu\n",
                      rnti_hex(tl.rnti).c_str(), tl.n_records,
                      static_cast<double>(tl.first_seen_ms) / 1000.0,
                      static_cast<double>(tl.last_seen_ms) / 1000.0, tl.segments.size());
        out += buf;
        for (const auto& seg : tl.segments) {
            std::snprintf(buf, sizeof(buf),
                          "  [%9.3f s, %9.3f s] %-12s confidence=%.3f windows=%zu\n",
                          static_cast<double>(seg.t_start_ms) / 1000.0,
                          static_cast<double>(seg.t_end_ms) / 1000.0, seg.label.c_str(),
                          seg.mean_confidence, seg.n_windows);
            out += buf;
        }
    }
    return out;
}

std::string format_scan_csv(const ScanReport& report) {
    std::string out = "rnti,t_start_ms,t_end_ms,label,mean_confidence,n_windows\n";
    char buf[256];
    for (const auto& tl : report.per_rnti)
        for (const auto& seg : tl.segments) {
            std::snprintf(buf, sizeof(buf), "%s,%llu,%llu,%s,%.6f,%zu\n",
                          rnti_hex(tl.rnti).c_str(),
                          static_cast<unsigned long long>(seg.t_start_ms),
                          static_cast<unsigned long long>(seg.t_end_ms), seg.label.c_str(),
                          seg.mean_confidence, seg.n_windows);
            out += buf;
        }
    return out;
}

std::string format_activity_csv(const ScanReport& report) {
    std::string out = "second,active_rntis\n";
    char buf[64];
    for (const auto& [second, n] : report.active_per_second) {
        std::snprintf(buf, sizeof(buf), "%llu,%u\n", static_cast<unsigned long long>(second), n);
        out += buf;
    }
    return out;
}

}  // namespace dcifp
