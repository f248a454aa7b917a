#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "dcifp/attacks.hpp"
#include "dcifp/capture.hpp"
#include "dcifp/eval.hpp"
#include "dcifp/synth.hpp"
#include "dcifp/train.hpp"

using namespace dcifp;

namespace {

Trace background_cell(size_t ues, double duration_s, uint64_t seed) {
    const auto& profiles = builtin_profiles();
    const auto& labels = default_app_labels();
    std::map<uint16_t, AppProfile> assignment;
    for (size_t i = 0; i < ues; ++i)
        assignment[static_cast<uint16_t>(0x4A00 + i)] = profiles.at(labels[i % labels.size()]);
    return generate_cell(assignment, duration_s, seed);
}

// brute-force oracle: per-rnti rb sums inside one detection window
std::map<uint16_t, std::pair<double, double>> window_rates(const Trace& t, double lo_ms,
                                                           double len_s) {
    std::map<uint16_t, std::pair<double, double>> rates;  // rnti -> (ul, dl)
    for (const DciRecord& r : t.records) {
        double ts = static_cast<double>(r.t_ms);
        if (ts < lo_ms || ts >= lo_ms + len_s * 1000.0) continue;
        auto& e = rates[r.rnti];
        (r.dci_format == DciFormat::F0_0 ? e.first : e.second) += r.rb_count;
    }
    for (auto& [rnti, e] : rates) {
        e.first /= len_s;
        e.second /= len_s;
    }
    return rates;
}

}  // namespace

TEST_CASE("signature validation guards every field") {
    SignatureSpec spec;  // defaults are valid
    CHECK_NOTHROW(validate_signature(spec));
    CHECK(spec.n_bursts == 7);
    REQUIRE(spec.intervals_s.size() == 6);
    CHECK(spec.intervals_s[5] == 20);

    SignatureSpec bad = spec;
    bad.n_bursts = 0;
    CHECK_THROWS(validate_signature(bad));
    bad = spec;
    bad.intervals_s.pop_back();
    CHECK_THROWS(validate_signature(bad));
    bad = spec;
    bad.intervals_s[2] = -1;
    CHECK_THROWS(validate_signature(bad));
    bad = spec;
    bad.burst_bytes = 1024;  // too small to survive thinning
    CHECK_THROWS(validate_signature(bad));
    bad = spec;
    bad.detect_window_s = 0;
    CHECK_THROWS(validate_signature(bad));
    bad = spec;
    bad.thresholds.rb_per_s_dl = 0;
    CHECK_THROWS(validate_signature(bad));
}

TEST_CASE("burst offsets accumulate the configured gaps") {
    SignatureSpec spec;
    auto offsets = burst_offsets_ms(spec);
    REQUIRE(offsets.size() == 7);
    CHECK(offsets[0] == 0);
    CHECK(offsets[1] == 10000);
    CHECK(offsets[5] == 50000);
    CHECK(offsets[6] == 70000);  // the final 20 s gap
}

TEST_CASE("signature config file round-trips and rejects junk") {
    const std::string path = "test_signature.cfg";
    SignatureSpec spec;
    spec.intervals_s = {5, 5, 7.5};
    spec.n_bursts = 4;
    spec.burst_bytes = 2.5 * 1024 * 1024;
    spec.detect_window_s = 1.5;
    spec.thresholds.require_both = true;
    spec.thresholds.rb_per_s_ul = 1234.5;
    write_signature_file(path, spec);
    CHECK(read_signature_file(path) == spec);

    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("n_bursts=3\nintervals_s=10,10\nwombat=1\n", f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS(read_signature_file(path), doctest::Contains("wombat"),
                         std::runtime_error);
    f = std::fopen(path.c_str(), "wb");
    std::fputs("n_bursts=3\n", f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS(read_signature_file(path), doctest::Contains("intervals_s"),
                         std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("injection plants n_bursts sub-second clusters for the target") {
    Trace cell = background_cell(8, 90, 31);
    SignatureSpec spec;
    Trace injected = inject_signature(cell, 0x4ABC, spec, 5000, 77);
    CHECK(injected.sorted());
    CHECK(injected.records.size() > cell.records.size());

    // determinism
    Trace again = inject_signature(cell, 0x4ABC, spec, 5000, 77);
    CHECK(injected.records == again.records);
    Trace other = inject_signature(cell, 0x4ABC, spec, 5000, 78);
    CHECK(injected.records != other.records);

    // non-target records are untouched
    std::vector<DciRecord> rest, orig;
    for (const DciRecord& r : injected.records)
        if (r.rnti != 0x4ABC) rest.push_back(r);
    for (const DciRecord& r : cell.records)
        if (r.rnti != 0x4ABC) orig.push_back(r);
    CHECK(rest == orig);

    // target records cluster within 1 s after each scheduled burst time
    auto offsets = burst_offsets_ms(spec);
    size_t clustered = 0, total = 0;
    for (const DciRecord& r : injected.records) {
        if (r.rnti != 0x4ABC) continue;
        ++total;
        for (double off : offsets)
            if (r.t_ms >= 5000 + off && r.t_ms < 5000 + off + 1000) {
                ++clustered;
                break;
            }
    }
    CHECK(total > 0);
    // the background UE at 0x4ABC does not exist in this cell (RNTIs start
    // at 0x4A00 and there are 8), so every target record is injected
    CHECK(clustered == total);

    // payload per burst: at least burst_bytes of DL traffic scheduled
    for (double off : offsets) {
        double dl_bits = 0;
        for (const DciRecord& r : injected.records)
            if (r.rnti == 0x4ABC && r.t_ms >= 5000 + off && r.t_ms < 5000 + off + 1000 &&
                r.direction == Direction::DL)
                dl_bits += static_cast<double>(r.tbs_bits);
        CHECK(dl_bits >= spec.burst_bytes * 8);
    }
}

TEST_CASE("injection validates t0 and the capture estimate") {
    Trace cell = background_cell(4, 30, 33);
    SignatureSpec spec;
    CHECK_THROWS(inject_signature(cell, 0x4ABC, spec, 50000, 1));  // past the trace span
    CHECK_THROWS(inject_signature(cell, 0x4ABC, spec, -100, 1));
    CHECK_THROWS(inject_signature(cell, 0x4ABC, spec, 5000, 1, 0.0));
    CHECK_THROWS(inject_signature(cell, 0x4ABC, spec, 5000, 1, 1.5));
    Trace empty;
    // spans are unknowable for an empty trace; injection still proceeds
    Trace only_sig = inject_signature(empty, 0x4ABC, spec, 0, 1);
    CHECK(!only_sig.records.empty());
}

TEST_CASE("detection at full capture recovers the planted pattern exactly") {
    Trace cell = background_cell(16, 100, 35);
    SignatureSpec spec;
    Trace injected = inject_signature(cell, 0x4ABC, spec, 8000, 41);
    HuntResult res = detect_target(injected, spec, 8000);
    REQUIRE(res.unique_target.has_value());
    CHECK(*res.unique_target == 0x4ABC);
    CHECK(res.full_pattern_count == 1);
    CHECK(res.candidates.at(0x4ABC) == spec.n_bursts);
    REQUIRE(res.burst_hits.size() == spec.n_bursts);
    for (const auto& hits : res.burst_hits) CHECK(hits.count(0x4ABC) == 1);

    std::string text = format_hunt_result(res, spec);
    CHECK(text.find("4ABC") != std::string::npos);
}

TEST_CASE("detection agrees with a brute-force rate oracle") {
    Trace cell = background_cell(16, 100, 37);
    SignatureSpec spec;
    Trace injected = inject_signature(cell, 0x4ABC, spec, 8000, 43);
    CaptureConfig cap;
    cap.capture_prob = 0.3;
    cap.seed = 5;
    Trace captured = apply_capture(injected, cap);

    HuntResult res = detect_target(captured, spec, 8000);
    auto offsets = burst_offsets_ms(spec);
    std::map<uint16_t, size_t> expected_hits;
    for (size_t k = 0; k < offsets.size(); ++k) {
        auto rates = window_rates(captured, 8000 + offsets[k], spec.detect_window_s);
        for (const auto& [rnti, ul_dl] : rates) {
            bool hit = ul_dl.first >= spec.thresholds.rb_per_s_ul ||
                       ul_dl.second >= spec.thresholds.rb_per_s_dl;
            if (!hit) continue;
            ++expected_hits[rnti];
            CHECK(res.burst_hits[k].count(rnti) == 1);
        }
        // and nothing extra
        for (uint16_t rnti : res.burst_hits[k]) {
            auto it = rates.find(rnti);
            REQUIRE(it != rates.end());
            CHECK((it->second.first >= spec.thresholds.rb_per_s_ul ||
                   it->second.second >= spec.thresholds.rb_per_s_dl));
        }
    }
    CHECK(res.candidates == expected_hits);
}

TEST_CASE("no injection means no full-pattern match") {
    SignatureSpec spec;
    for (uint64_t seed : {51, 52, 53}) {
        Trace cell = background_cell(16, 100, seed);
        CaptureConfig cap;
        cap.capture_prob = 0.1;
        cap.seed = seed + 100;
        HuntResult res = detect_target(apply_capture(cell, cap), spec, 8000);
        CHECK(res.full_pattern_count == 0);
        CHECK(!res.unique_target.has_value());
    }
}

// ---------------------------------------------------------------------------
// scanning

namespace {

AppProfile voip_like(const AppLabel& name, Range period_ms, double tbs_mean_bits) {
    AppProfile p;
    p.name = name;
    p.kind = TrafficKind::CONTINUOUS_VOIP;
    p.voip_period_ms = period_ms;
    p.tbs_dl_bits = {std::log(tbs_mean_bits), 0.25};
    p.tbs_ul_bits = {std::log(tbs_mean_bits), 0.25};
    p.ul_fraction = 0.5;
    return p;
}

Trace scan_ue(const AppLabel& app, uint16_t rnti, double duration_s, uint64_t seed) {
    AppProfile p = app == "Afast" ? voip_like("Afast", {20, 20}, 1200.0)
                                  : voip_like("Bslow", {60, 70}, 9000.0);
    return generate(p, duration_s, rnti, seed);
}

// W=20 two-class classifier over the scan_ue traffic, trained once
const ModelBundle& scan_bundle() {
    static const ModelBundle bundle = [] {
        std::vector<Trace> traces;
        for (uint64_t s = 0; s < 3; ++s) {
            traces.push_back(scan_ue("Afast", 0x100, 40, 10 + s));
            traces.push_back(scan_ue("Bslow", 0x200, 80, 20 + s));
        }
        auto samples = windows_per_class(traces, 20, 20, 300, 10);
        TrainConfig cfg;
        cfg.epochs = 6;
        cfg.batch_size = 32;
        cfg.seed = 9;
        cfg.val_fraction = 0.1;
        return train(samples, cfg, std::nullopt, 10);
    }();
    return bundle;
}

}  // namespace

TEST_CASE("cell_scan labels a small cell and keeps timelines consistent") {
    const ModelBundle& bundle = scan_bundle();
    std::vector<Trace> ues = {scan_ue("Afast", 0x4101, 60, 71), scan_ue("Bslow", 0x4102, 60, 72),
                              scan_ue("Afast", 0x4103, 60, 73), scan_ue("Bslow", 0x4104, 60, 74)};
    Trace cell = merge_traces(ues);
    // one nearly-silent RNTI with fewer records than a window
    for (uint64_t t : {1000, 2000, 3000})
        cell.records.push_back({t, 0x4FFF, Direction::DL, 800, 1, DciFormat::F1_0});
    std::sort(cell.records.begin(), cell.records.end(),
              [](const DciRecord& a, const DciRecord& b) { return a.t_ms < b.t_ms; });

    ScanReport report = cell_scan(cell, bundle, 0.5);
    CHECK(report.W == 20);
    REQUIRE(report.per_rnti.size() == 5);

    std::map<uint16_t, AppLabel> expect = {{0x4101, "Afast"},
                                           {0x4102, "Bslow"},
                                           {0x4103, "Afast"},
                                           {0x4104, "Bslow"}};
    for (size_t i = 0; i < report.per_rnti.size(); ++i) {
        const RntiTimeline& tl = report.per_rnti[i];
        if (i > 0) CHECK(tl.rnti > report.per_rnti[i - 1].rnti);  // ordered by RNTI
        CHECK(tl.seen);
        uint64_t prev_end = 0;
        size_t labeled = 0, majority = 0;
        for (const ScanSegment& seg : tl.segments) {
            CHECK(seg.t_start_ms <= seg.t_end_ms);
            if (prev_end > 0) CHECK(seg.t_start_ms > prev_end);  // non-overlapping, ordered
            prev_end = seg.t_end_ms;
            CHECK(seg.t_start_ms >= tl.first_seen_ms);
            CHECK(seg.t_end_ms <= tl.last_seen_ms);
            CHECK(seg.mean_confidence >= 0.5);
            CHECK(seg.mean_confidence <= 1.0);
            CHECK(seg.n_windows >= 1);
            labeled += seg.n_windows;
            if (expect.count(tl.rnti) && seg.label == expect[tl.rnti]) majority += seg.n_windows;
        }
        if (tl.rnti == 0x4FFF) {
            CHECK(tl.n_records == 3);
            CHECK(tl.segments.empty());  // too short to classify
        } else {
            REQUIRE(labeled > 0);
            // clean traffic: the dominant label matches the generating app
            CHECK(static_cast<double>(majority) / static_cast<double>(labeled) > 0.9);
        }
    }

    // activity counts match a brute-force recount, including the short RNTI
    std::map<uint64_t, std::set<uint16_t>> active;
    for (const DciRecord& r : cell.records) active[r.t_ms / 1000].insert(r.rnti);
    REQUIRE(report.active_per_second.size() == active.size());
    size_t i = 0;
    for (const auto& [second, rntis] : active) {
        CHECK(report.active_per_second[i].first == second);
        CHECK(report.active_per_second[i].second == rntis.size());
        ++i;
    }
    CHECK(active.at(1).count(0x4FFF) == 1);

    // formatting: one CSV row per segment / per second, plus headers
    std::string csv = format_scan_csv(report);
    CHECK(csv.find("rnti,t_start_ms,t_end_ms,label,mean_confidence,n_windows") == 0);
    size_t total_segments = 0;
    for (const auto& tl : report.per_rnti) total_segments += tl.segments.size();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(total_segments) + 1);
    std::string act = format_activity_csv(report);
    CHECK(act.find("second,active_rntis") == 0);
    CHECK(std::count(act.begin(), act.end(), '\n') ==
          static_cast<long>(report.active_per_second.size()) + 1);
    CHECK(format_scan_report(report).find("4101") != std::string::npos);
}

TEST_CASE("track_target equals the cell scan restricted to that RNTI") {
    const ModelBundle& bundle = scan_bundle();
    Trace cell = merge_traces({scan_ue("Afast", 0x4101, 45, 81), scan_ue("Bslow", 0x4102, 45, 82)});

    ScanReport full = cell_scan(cell, bundle, 0.5);
    ScanReport tracked = track_target(cell, 0x4102, bundle, 0.5);
    REQUIRE(tracked.per_rnti.size() == 1);
    const RntiTimeline& a = tracked.per_rnti[0];
    const RntiTimeline* b = nullptr;
    for (const auto& tl : full.per_rnti)
        if (tl.rnti == 0x4102) b = &tl;
    REQUIRE(b != nullptr);
    CHECK(a.seen == b->seen);
    CHECK(a.first_seen_ms == b->first_seen_ms);
    CHECK(a.last_seen_ms == b->last_seen_ms);
    CHECK(a.n_records == b->n_records);
    REQUIRE(a.segments.size() == b->segments.size());
    for (size_t i = 0; i < a.segments.size(); ++i) {
        CHECK(a.segments[i].t_start_ms == b->segments[i].t_start_ms);
        CHECK(a.segments[i].t_end_ms == b->segments[i].t_end_ms);
        CHECK(a.segments[i].label == b->segments[i].label);
        CHECK(a.segments[i].mean_confidence == b->segments[i].mean_confidence);
        CHECK(a.segments[i].n_windows == b->segments[i].n_windows);
    }

    ScanReport absent = track_target(cell, 0x7777, bundle, 0.5);
    REQUIRE(absent.per_rnti.size() == 1);
    CHECK(!absent.per_rnti[0].seen);
    CHECK(absent.per_rnti[0].rnti == 0x7777);
    CHECK(absent.per_rnti[0].segments.empty());
}

TEST_CASE("long silences split segments and bad confidence bounds throw") {
    const ModelBundle& bundle = scan_bundle();
    Trace early = scan_ue("Afast", 0x4101, 20, 91);
    Trace late = scan_ue("Afast", 0x4101, 20, 92);
    for (DciRecord& r : late.records) r.t_ms += 100000;  // 80 s of silence in between
    Trace both;
    both.records = early.records;
    both.records.insert(both.records.end(), late.records.begin(), late.records.end());

    ScanReport report = cell_scan(both, bundle, 0.5, {}, 30000);
    REQUIRE(report.per_rnti.size() == 1);
    const auto& segs = report.per_rnti[0].segments;
    REQUIRE(segs.size() >= 2);
    bool found_split = false;
    for (size_t i = 1; i < segs.size(); ++i)
        if (segs[i].t_start_ms >= 100000 && segs[i - 1].t_end_ms <= 20000) found_split = true;
    CHECK(found_split);

    CHECK_THROWS(cell_scan(both, bundle, -0.1));
    CHECK_THROWS(cell_scan(both, bundle, 1.5));
}
