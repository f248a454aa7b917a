#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dcifp/rng.hpp"
#include "dcifp/trace_io.hpp"

using namespace dcifp;

namespace {

Trace random_trace(uint64_t seed, size_t n, uint16_t rnti) {
    Rng rng(seed);
    Trace t;
    t.meta.label = "YouTube";
    t.meta.capture_ratio = 0.05;
    t.meta.seed = seed;
    uint64_t ts = 0;
    for (size_t i = 0; i < n; ++i) {
        DciRecord r;
        ts += rng.uniform_int(0, 40);
        r.t_ms = ts;
        r.rnti = rnti;
        r.dci_format = rng.bernoulli(0.3) ? DciFormat::F0_0 : DciFormat::F1_0;
        r.direction = direction_for(r.dci_format);
        r.tbs_bits = 1 + rng.uniform_int(0, 300000);
        r.rb_count = 1 + rng.uniform_int(0, 270);
        t.records.push_back(r);
    }
    return t;
}

}  // namespace

TEST_CASE("record line maps to fields directly") {
    std::istringstream in("1000,4ABC,DL,81928,24,F1_0\n");
    Trace t = read_trace(in);
    REQUIRE(t.records.size() == 1);
    const DciRecord& r = t.records[0];
    CHECK(r.t_ms == 1000);
    CHECK(r.rnti == 0x4ABC);
    CHECK(r.direction == Direction::DL);
    CHECK(r.tbs_bits == 81928);
    CHECK(r.rb_count == 24);
    CHECK(r.dci_format == DciFormat::F1_0);
}

TEST_CASE("empty input yields empty trace") {
    std::istringstream in("");
    Trace t = read_trace(in);
    CHECK(t.records.empty());
    CHECK(!t.meta.label);
}

TEST_CASE("out-of-order records are sorted with a warning") {
    std::istringstream in("5,0001,UL,100,2,F0_0\n3,0001,UL,100,2,F0_0\n");
    std::vector<std::string> warnings;
    Trace t = read_trace(in, &warnings);
    REQUIRE(t.records.size() == 2);
    CHECK(t.records[0].t_ms == 3);
    CHECK(t.records[1].t_ms == 5);
    CHECK(warnings.size() == 1);
}

TEST_CASE("metadata header lines are parsed") {
    std::istringstream in("# label=Netflix\n# capture_ratio=0.05\n# seed=42\n10,0001,DL,8,1,F1_0\n");
    Trace t = read_trace(in);
    CHECK(t.meta.label == "Netflix");
    CHECK(t.meta.capture_ratio == 0.05);
    CHECK(t.meta.seed == 42);
}

TEST_CASE("unknown metadata key warns, free comment does not") {
    std::istringstream in("# note this is free form\n# color=blue\n");
    std::vector<std::string> warnings;
    read_trace(in, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("color") != std::string::npos);
}

TEST_CASE("direction/format coupling is enforced on read") {
    std::istringstream in("1000,4ABC,UL,81928,24,F1_0\n");
    CHECK_THROWS_WITH_AS(read_trace(in), doctest::Contains("line 1"), std::runtime_error);
}

TEST_CASE("malformed lines report their line number") {
    std::istringstream in("10,0001,DL,8,1,F1_0\nnot,a,record\n");
    CHECK_THROWS_WITH_AS(read_trace(in), doctest::Contains("line 2"), std::runtime_error);
    std::istringstream in2("10,0001,XX,8,1,F1_0\n");
    CHECK_THROWS_WITH_AS(read_trace(in2), doctest::Contains("direction"), std::runtime_error);
    std::istringstream in3("10,12345,DL,8,1,F1_0\n");
    CHECK_THROWS(read_trace(in3));
    std::istringstream in4("10,0001,DL,0,1,F1_0\n");
    CHECK_THROWS_WITH_AS(read_trace(in4), doctest::Contains("tbs_bits"), std::runtime_error);
}

TEST_CASE("rnti renders as fixed-width upper hex") {
    CHECK(rnti_hex(0x4ABC) == "4ABC");
    CHECK(rnti_hex(0x001) == "0001");
    CHECK(rnti_hex(0xFFFF) == "FFFF");
    CHECK(parse_rnti_hex("4ABC") == 0x4ABC);
    CHECK(parse_rnti_hex("0001") == 1);
    CHECK_THROWS(parse_rnti_hex("1"));
    CHECK_THROWS(parse_rnti_hex("GGGG"));
}

TEST_CASE("write/read round-trip is identity and bytes are stable") {
    Trace t = random_trace(7, 1000, 0x4601);
    std::ostringstream first;
    write_trace(first, t);
    std::istringstream back(first.str());
    Trace t2 = read_trace(back);
    CHECK(t2 == t);
    std::ostringstream second;
    write_trace(second, t2);
    CHECK(second.str() == first.str());
    CHECK(first.str().find("# label=YouTube\n") == 0);
}

TEST_CASE("capture_ratio survives round-trip exactly") {
    for (double v : {0.05, 0.1, 1.0, 0.123456789012345}) {
        Trace t;
        t.meta.capture_ratio = v;
        std::ostringstream out;
        write_trace(out, t);
        std::istringstream in(out.str());
        CHECK(read_trace(in).meta.capture_ratio == v);
    }
}

TEST_CASE("merge of two single-record traces orders by time") {
    Trace a, b;
    a.records.push_back({2, 1, Direction::DL, 8, 1, DciFormat::F1_0});
    b.records.push_back({1, 2, Direction::DL, 8, 1, DciFormat::F1_0});
    Trace m = merge_traces({a, b});
    REQUIRE(m.records.size() == 2);
    CHECK(m.records[0].t_ms == 1);
    CHECK(m.records[1].t_ms == 2);
}

TEST_CASE("merge conserves records and per-RNTI order; filter inverts") {
    std::vector<Trace> inputs;
    size_t total = 0;
    for (uint16_t u = 0; u < 64; ++u) {
        inputs.push_back(random_trace(100 + u, 50 + u, static_cast<uint16_t>(0x4000 + u)));
        total += inputs.back().records.size();
    }
    Trace m = merge_traces(inputs);
    CHECK(m.records.size() == total);
    CHECK(m.sorted());
    for (uint16_t u = 0; u < 64; ++u) {
        std::vector<DciRecord> filtered;
        for (const DciRecord& r : m.records)
            if (r.rnti == 0x4000 + u) filtered.push_back(r);
        CHECK(filtered == inputs[u].records);
    }
    CHECK(m.meta.label == "YouTube");       // unanimous across inputs
    CHECK(m.meta.capture_ratio == 0.05);
    CHECK(!m.meta.seed);                    // seeds differ → dropped
}

TEST_CASE("merge rejects RNTI collisions across different labels") {
    Trace a = random_trace(1, 5, 0x1234);
    Trace b = random_trace(2, 5, 0x1234);
    b.meta.label = "Netflix";
    CHECK_THROWS_WITH_AS(merge_traces({a, b}), doctest::Contains("1234"), std::runtime_error);
    b.meta.label = a.meta.label;  // same label: allowed
    CHECK_NOTHROW(merge_traces({a, b}));
}

TEST_CASE("default app labels match the trained class set") {
    const auto& labels = default_app_labels();
    REQUIRE(labels.size() == 8);
    CHECK(labels[0] == "YouTube");
    CHECK(labels[1] == "Netflix");
    CHECK(labels[2] == "Disney+");
    CHECK(labels[3] == "PrimeVideo");
    CHECK(labels[4] == "YTMusic");
    CHECK(labels[5] == "Spotify");
    CHECK(labels[6] == "WhatsApp");
    CHECK(labels[7] == "Telegram");
}

TEST_CASE("seed mixing decorrelates streams and stays portable") {
    CHECK(mix_seed(42, 0) != mix_seed(42, 1));
    CHECK(mix_seed(42, 1) != mix_seed(43, 1));
    // Pinned value: guards against accidental change of the mixing function,
    // which would silently re-synthesize every fixture.
    CHECK(mix_seed(0, 0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("rng streams are deterministic and well-behaved") {
    Rng a(mix_seed(42, 7)), b(mix_seed(42, 7));
    for (int i = 0; i < 1000; ++i) {
        double u = a.uniform01();
        CHECK(u == b.uniform01());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng c(1);
    double sum = 0, sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = c.normal();
        sum += x;
        sum2 += x * x;
    }
    double mean = sum / n;
    double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
    Rng d(2);
    for (int i = 0; i < 1000; ++i) {
        int v = d.uniform_int(3, 9);
        CHECK(v >= 3);
        CHECK(v <= 9);
    }
}
