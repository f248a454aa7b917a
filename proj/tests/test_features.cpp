#include <doctest.h>

#include <cstdio>

#include "dcifp/features.hpp"
#include "dcifp/rng.hpp"

using namespace dcifp;

namespace {

DciRecord rec(uint64_t t_ms, Direction dir, uint64_t tbs_bits) {
    DciRecord r;
    r.t_ms = t_ms;
    r.rnti = 0x4ABC;
    r.direction = dir;
    r.dci_format = dir == Direction::UL ? DciFormat::F0_0 : DciFormat::F1_0;
    r.tbs_bits = tbs_bits;
    r.rb_count = 4;
    return r;
}

// rows with controllable gaps; every tbs 2000 bits, all downlink
std::vector<DciRecord> records_with_gaps(const std::vector<uint64_t>& gaps_ms) {
    std::vector<DciRecord> recs;
    uint64_t t = 0;
    recs.push_back(rec(t, Direction::DL, 2000));
    for (uint64_t g : gaps_ms) {
        t += g;
        recs.push_back(rec(t, Direction::DL, 2000));
    }
    return recs;
}

}  // namespace

TEST_CASE("feature rows map direction, size, and spacing exactly") {
    std::vector<DciRecord> recs = {rec(1000, Direction::DL, 81928),
                                   rec(1250, Direction::UL, 1000),
                                   rec(3250, Direction::DL, 500)};
    auto rows = extract_features(recs);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].direction_code == 0.0);
    CHECK(rows[0].tbs_kb == 81.928);
    CHECK(rows[0].dt_s == 0.0);  // no predecessor
    CHECK(rows[1].direction_code == 1.0);
    CHECK(rows[1].tbs_kb == 1.0);
    CHECK(rows[1].dt_s == 0.25);
    CHECK(rows[2].direction_code == 0.0);
    CHECK(rows[2].tbs_kb == 0.5);
    CHECK(rows[2].dt_s == 2.0);
}

TEST_CASE("unsorted records are rejected") {
    std::vector<DciRecord> recs = {rec(100, Direction::DL, 10), rec(50, Direction::DL, 10)};
    CHECK_THROWS(extract_features(recs));
}

TEST_CASE("windows inside one burst are dropped, cross-burst windows kept") {
    // gaps: 10,10,1500,10,10 -> records at 0,10,20,1520,1530,1540
    auto recs = records_with_gaps({10, 10, 1500, 10, 10});
    auto rows = extract_features(recs);
    std::vector<uint64_t> times;
    for (const auto& r : recs) times.push_back(r.t_ms);

    auto windows = build_windows(rows, times, 3, 1, 1000, "X", 0x4ABC);
    // starts 0..3; [0,2] all-gap-10 dropped; [3,5] dropped; [1,3] and [2,4]
    // cross the 1500 ms boundary
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].t_start_ms == 10);
    CHECK(windows[0].t_end_ms == 1520);
    CHECK(windows[1].t_start_ms == 20);
    CHECK(windows[1].t_end_ms == 1530);
    CHECK(windows[0].rows.size() == 3);
    CHECK(*windows[0].label == "X");
    CHECK(windows[0].rnti == 0x4ABC);
}

TEST_CASE("the burst threshold is a strict boundary") {
    auto recs = records_with_gaps({999, 999});
    auto rows = extract_features(recs);
    std::vector<uint64_t> times{0, 999, 1998};
    CHECK(build_windows(rows, times, 3, 1, 1000, std::nullopt, 1).empty());
    auto kept = build_windows(rows, times, 3, 1, 999, std::nullopt, 1);
    CHECK(kept.size() == 1);  // gap == threshold counts as leaving the burst
}

TEST_CASE("single-instance windows are never burst-filtered") {
    auto recs = records_with_gaps({10, 10, 10});
    auto rows = extract_features(recs);
    std::vector<uint64_t> times{0, 10, 20, 30};
    auto windows = build_windows(rows, times, 1, 1, 1000, std::nullopt, 1);
    CHECK(windows.size() == 4);
}

TEST_CASE("stride walks window starts; short inputs yield nothing") {
    auto recs = records_with_gaps(std::vector<uint64_t>(9, 1200));  // 10 records
    auto rows = extract_features(recs);
    std::vector<uint64_t> times;
    for (const auto& r : recs) times.push_back(r.t_ms);
    CHECK(build_windows(rows, times, 3, 1, 1000, std::nullopt, 1).size() == 8);
    CHECK(build_windows(rows, times, 3, 3, 1000, std::nullopt, 1).size() == 3);
    CHECK(build_windows(rows, times, 11, 1, 1000, std::nullopt, 1).empty());
    CHECK_THROWS(build_windows(rows, times, 0, 1, 1000, std::nullopt, 1));
    CHECK_THROWS(build_windows(rows, times, 3, 0, 1000, std::nullopt, 1));
}

TEST_CASE("windowing a prefix reproduces the prefix of the windows") {
    Rng rng(31);
    std::vector<uint64_t> gaps;
    for (int i = 0; i < 199; ++i) gaps.push_back(rng.uniform_int(1, 2500));
    auto recs = records_with_gaps(gaps);
    auto rows = extract_features(recs);
    std::vector<uint64_t> times;
    for (const auto& r : recs) times.push_back(r.t_ms);

    auto full = build_windows(rows, times, 10, 4, 1000, std::nullopt, 1);
    size_t K = 120;
    std::vector<FeatureRow> rows_k(rows.begin(), rows.begin() + K);
    std::vector<uint64_t> times_k(times.begin(), times.begin() + K);
    auto prefix = build_windows(rows_k, times_k, 10, 4, 1000, std::nullopt, 1);
    REQUIRE(prefix.size() <= full.size());
    for (size_t i = 0; i < prefix.size(); ++i) {
        CHECK(prefix[i].t_start_ms == full[i].t_start_ms);
        CHECK(prefix[i].rows == full[i].rows);
    }
}

TEST_CASE("windows_from_trace demands a single rnti and carries the label") {
    Trace t;
    t.meta.label = "YouTube";
    t.records = records_with_gaps({1200, 1200, 1200});
    auto windows = windows_from_trace(t, 2, 2, 1000);
    REQUIRE(windows.size() == 2);
    CHECK(*windows[0].label == "YouTube");
    CHECK(windows[0].rnti == 0x4ABC);

    t.records.push_back(rec(99999, Direction::DL, 10));
    t.records.back().rnti = 0x1111;
    CHECK_THROWS(windows_from_trace(t, 2, 2, 1000));

    Trace empty;
    CHECK(windows_from_trace(empty, 5, 5, 1000).empty());
}

TEST_CASE("fill times for a constant-rate stream are exactly (W-1)/rate") {
    Trace t;
    for (size_t i = 0; i < 1000; ++i) t.records.push_back(rec(20 * i, Direction::DL, 1000));
    auto fills = time_to_fill(t, 20);
    REQUIRE(fills.size() == 50);
    for (double f : fills) CHECK(f == doctest::Approx(19 * 0.020).epsilon(1e-12));
}

TEST_CASE("dataset file round-trips samples exactly") {
    Rng rng(77);
    Dataset ds;
    ds.W = 5;
    ds.stride = 5;
    ds.burst_gap_ms = 1000;
    for (int s = 0; s < 40; ++s) {
        WindowSample w;
        w.label = s % 2 ? "YouTube" : "Spotify";
        w.rnti = static_cast<uint16_t>(rng.uniform_int(1, 0xFFFF));
        w.t_start_ms = rng.uniform_int(0, 1000000);
        w.t_end_ms = w.t_start_ms + rng.uniform_int(0, 5000);
        for (size_t i = 0; i < ds.W; ++i) {
            FeatureRow row;
            row.direction_code = rng.bernoulli(0.3) ? 1.0 : 0.0;
            row.tbs_kb = rng.lognormal(3.0, 1.0);
            row.dt_s = i == 0 ? 0.0 : rng.uniform(0.0, 4.0);
            w.rows.push_back(row);
        }
        ds.samples.push_back(std::move(w));
    }
    const std::string path = "test_dataset_roundtrip.ds";
    write_dataset_file(path, ds);
    Dataset back = read_dataset_file(path);
    CHECK(back.W == ds.W);
    CHECK(back.stride == ds.stride);
    CHECK(back.burst_gap_ms == ds.burst_gap_ms);
    REQUIRE(back.samples.size() == ds.samples.size());
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(back.samples[i].rows == ds.samples[i].rows);  // shortest-digits exact
        CHECK(back.samples[i].label == ds.samples[i].label);
        CHECK(back.samples[i].rnti == ds.samples[i].rnti);
        CHECK(back.samples[i].t_start_ms == ds.samples[i].t_start_ms);
    }
    std::remove(path.c_str());
}

TEST_CASE("dataset reader rejects malformed files with line context") {
    const std::string path = "test_dataset_bad.ds";
    auto write = [&](const std::string& content) {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        REQUIRE(f);
        std::fwrite(content.data(), 1, content.size(), f);
        std::fclose(f);
    };
    write("YouTube,4ABC,0,100\n0,1.5,0\n");  // sample before # window=
    CHECK_THROWS_WITH_AS(read_dataset_file(path), doctest::Contains("window"),
                         std::runtime_error);
    write("# window=2\nYouTube,4ABC,0,100\n0,1.5,0\n");  // truncated rows
    CHECK_THROWS_WITH_AS(read_dataset_file(path), doctest::Contains("truncated"),
                         std::runtime_error);
    write("# window=1\nYouTube,4ABC,0,100\n2,1.5,0\n");  // direction not 0/1
    CHECK_THROWS_WITH_AS(read_dataset_file(path), doctest::Contains("direction"),
                         std::runtime_error);
    write("# window=1\nYouTube,4ABC,200,100\n0,1.5,0\n");  // end before start
    CHECK_THROWS(read_dataset_file(path));
    std::remove(path.c_str());
}
