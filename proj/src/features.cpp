#include "dcifp/features.hpp"

#include <charconv>
#include <fstream>
#include <set>

namespace dcifp {
namespace {

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("number format failure");
    return std::string(buf, p);
}

double parse_num(const std::string& s, size_t line_no) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

uint64_t parse_u64(const std::string& s, size_t line_no) {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::vector<FeatureRow> extract_features(const std::vector<DciRecord>& records) {
    std::vector<FeatureRow> rows;
    rows.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        if (i > 0 && records[i].t_ms < records[i - 1].t_ms)
            throw std::runtime_error("extract_features: records not sorted by t_ms");
        FeatureRow row;
        row.direction_code = records[i].direction == Direction::UL ? 1.0 : 0.0;
        row.tbs_kb = static_cast<double>(records[i].tbs_bits) / 1000.0;
        row.dt_s = i == 0 ? 0.0
                          : static_cast<double>(records[i].t_ms - records[i - 1].t_ms) / 1000.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<WindowSample> build_windows(const std::vector<FeatureRow>& rows,
                                        const std::vector<uint64_t>& times_ms, size_t W,
                                        size_t stride, uint32_t burst_gap_ms,
                                        const std::optional<AppLabel>& label, uint16_t rnti) {
    if (W < 1) throw std::runtime_error("build_windows: W must be >= 1");
    if (stride < 1) throw std::runtime_error("build_windows: stride must be >= 1");
    if (rows.size() != times_ms.size())
        throw std::runtime_error("build_windows: rows/times length mismatch");
    std::vector<WindowSample> out;
    if (rows.size() < W) return out;
    const double gap_s = burst_gap_ms / 1000.0;
    for (size_t start = 0; start + W <= rows.size(); start += stride) {
        // single-burst check: dt entries of rows start+1..start+W-1 are the
        // W-1 gaps inside this window
        bool leaves_burst = false;
        for (size_t i = start + 1; i < start + W; ++i) {
            if (rows[i].dt_s >= gap_s) {
                leaves_burst = true;
                break;
            }
        }
        if (W > 1 && !leaves_burst) continue;
        WindowSample s;
        s.rows.assign(rows.begin() + start, rows.begin() + start + W);
        s.label = label;
        s.rnti = rnti;
        s.t_start_ms = times_ms[start];
        s.t_end_ms = times_ms[start + W - 1];
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<WindowSample> windows_from_trace(const Trace& trace, size_t W, size_t stride,
                                             uint32_t burst_gap_ms) {
    std::set<uint16_t> rntis;
    for (const DciRecord& r : trace.records) rntis.insert(r.rnti);
    if (rntis.size() > 1)
        throw std::runtime_error("windows_from_trace: trace mixes " +
                                 std::to_string(rntis.size()) + " RNTIs; demultiplex first");
    std::vector<FeatureRow> rows = extract_features(trace.records);
    std::vector<uint64_t> times;
    times.reserve(trace.records.size());
    for (const DciRecord& r : trace.records) times.push_back(r.t_ms);
    uint16_t rnti = rntis.empty() ? 0 : *rntis.begin();
    return build_windows(rows, times, W, stride, burst_gap_ms, trace.meta.label, rnti);
}

std::vector<double> time_to_fill(const Trace& trace, size_t W) {
    if (W < 1) throw std::runtime_error("time_to_fill: W must be >= 1");
    std::vector<double> out;
    const auto& recs = trace.records;
    for (size_t start = 0; start + W <= recs.size(); start += W)
        out.push_back(static_cast<double>(recs[start + W - 1].t_ms - recs[start].t_ms) / 1000.0);
    return out;
}

Dataset read_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    Dataset ds;
    std::string line;
    size_t line_no = 0;
    bool have_window = false;
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            size_t ws = body.find_first_not_of(' ');
            body = ws == std::string::npos ? std::string() : body.substr(ws);
            size_t eq = body.find('=');
            if (eq == std::string::npos) continue;
            std::string key = body.substr(0, eq), value = body.substr(eq + 1);
            if (key == "window") {
                ds.W = parse_u64(value, line_no);
                have_window = true;
            } else if (key == "stride") {
                ds.stride = parse_u64(value, line_no);
            } else if (key == "burst_gap_ms") {
                ds.burst_gap_ms = static_cast<uint32_t>(parse_u64(value, line_no));
            }
            continue;
        }
        if (!have_window || ds.W == 0) fail("sample data before '# window=' metadata");
        auto head = split(line, ',');
        if (head.size() != 4) fail("expected sample header label,rnti,t_start_ms,t_end_ms");
        WindowSample s;
        if (!head[0].empty()) s.label = head[0];
        s.rnti = parse_rnti_hex(head[1]);
        s.t_start_ms = parse_u64(head[2], line_no);
        s.t_end_ms = parse_u64(head[3], line_no);
        if (s.t_end_ms < s.t_start_ms) fail("t_end_ms before t_start_ms");
        s.rows.reserve(ds.W);
        for (size_t i = 0; i < ds.W; ++i) {
            if (!std::getline(in, line)) fail("truncated sample: expected " + std::to_string(ds.W) +
                                              " feature rows");
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            auto f = split(line, ',');
            if (f.size() != 3) fail("expected feature row dir,tbs_kb,dt_s");
            FeatureRow row;
            row.direction_code = parse_num(f[0], line_no);
            row.tbs_kb = parse_num(f[1], line_no);
            row.dt_s = parse_num(f[2], line_no);
            if (row.direction_code != 0.0 && row.direction_code != 1.0)
                fail("direction code must be 0 or 1");
            if (!(row.tbs_kb > 0)) fail("tbs_kb must be positive");
            if (!(row.dt_s >= 0)) fail("dt_s must be nonnegative");
            s.rows.push_back(row);
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

void write_dataset_file(const std::string& path, const Dataset& ds) {
    if (ds.W == 0) throw std::runtime_error("write_dataset_file: W not set");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open dataset file for write: " + path);
    out << "# window=" << ds.W << "\n";
    out << "# stride=" << ds.stride << "\n";
    out << "# burst_gap_ms=" << ds.burst_gap_ms << "\n";
    for (const WindowSample& s : ds.samples) {
        if (s.rows.size() != ds.W)
            throw std::runtime_error("write_dataset_file: sample with " +
                                     std::to_string(s.rows.size()) + " rows; window is " +
                                     std::to_string(ds.W));
        out << (s.label ? *s.label : "") << ',' << rnti_hex(s.rnti) << ',' << s.t_start_ms << ','
            << s.t_end_ms << "\n";
        for (const FeatureRow& r : s.rows)
            out << (r.direction_code == 1.0 ? '1' : '0') << ',' << fmt(r.tbs_kb) << ','
                << fmt(r.dt_s) << "\n";
    }
    if (!out) throw std::runtime_error("dataset write failure: " + path);
}

}  // namespace dcifp
