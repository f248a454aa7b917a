#include "dcifp/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace dcifp {
namespace {

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip
    if (ec != std::errc()) throw std::runtime_error("double format failure");
    return std::string(buf, p);
}

double parse_double(const std::string& s, const char* what, size_t line_no) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + what +
                                 " '" + s + "'");
    return v;
}

template <class T>
T parse_uint(const std::string& s, const char* what, size_t line_no) {
    T v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + what +
                                 " '" + s + "'");
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

Trace read_trace(std::istream& in, std::vector<std::string>* warnings) {
    Trace t;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            size_t ws = body.find_first_not_of(' ');
            body = ws == std::string::npos ? std::string() : body.substr(ws);
            size_t eq = body.find('=');
            if (eq == std::string::npos) continue;  // free-form comment
            std::string key = body.substr(0, eq), value = body.substr(eq + 1);
            if (key == "label")
                t.meta.label = value;
            else if (key == "capture_ratio")
                t.meta.capture_ratio = parse_double(value, "capture_ratio", line_no);
            else if (key == "seed")
                t.meta.seed = parse_uint<uint64_t>(value, "seed", line_no);
            else if (warnings)
                warnings->push_back("line " + std::to_string(line_no) +
                                    ": unknown metadata key '" + key + "' ignored");
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() != 6)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                                     std::to_string(fields.size()));
        DciRecord r;
        r.t_ms = parse_uint<uint64_t>(fields[0], "t_ms", line_no);
        try {
            r.rnti = parse_rnti_hex(fields[1]);
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (fields[2] == "DL")
            r.direction = Direction::DL;
        else if (fields[2] == "UL")
            r.direction = Direction::UL;
        else
            throw std::runtime_error("line " + std::to_string(line_no) + ": bad direction '" +
                                     fields[2] + "'");
        r.tbs_bits = parse_uint<uint64_t>(fields[3], "tbs_bits", line_no);
        r.rb_count = parse_uint<uint32_t>(fields[4], "rb_count", line_no);
        if (fields[5] == "F0_0")
            r.dci_format = DciFormat::F0_0;
        else if (fields[5] == "F1_0")
            r.dci_format = DciFormat::F1_0;
        else
            throw std::runtime_error("line " + std::to_string(line_no) + ": bad dci_format '" +
                                     fields[5] + "'");
        try {
            validate_record(r);
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        t.records.push_back(r);
    }
    if (!t.sorted()) {
        if (warnings) warnings->push_back("records out of order; sorted on read");
        std::stable_sort(t.records.begin(), t.records.end(),
                         [](const DciRecord& a, const DciRecord& b) { return a.t_ms < b.t_ms; });
    }
    return t;
}

Trace read_trace_file(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    try {
        return read_trace(in, warnings);
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_trace(std::ostream& out, const Trace& t) {
    if (t.meta.label) out << "# label=" << *t.meta.label << "\n";
    if (t.meta.capture_ratio) out << "# capture_ratio=" << format_double(*t.meta.capture_ratio) << "\n";
    if (t.meta.seed) out << "# seed=" << *t.meta.seed << "\n";
    for (const DciRecord& r : t.records) {
        out << r.t_ms << ',' << rnti_hex(r.rnti) << ',' << to_token(r.direction) << ','
            << r.tbs_bits << ',' << r.rb_count << ',' << to_token(r.dci_format) << "\n";
    }
    if (!out) throw std::runtime_error("trace write failure");
}

void write_trace_file(const std::string& path, const Trace& t) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw std::runtime_error("cannot open trace file for write: " + path);
    write_trace(out, t);
    out.flush();
    if (!out) throw std::runtime_error("trace write failure: " + path);
}

Trace merge_traces(const std::vector<Trace>& inputs) {
    Trace out;
    std::map<uint16_t, const Trace*> owner;
    size_t total = 0;
    for (const Trace& t : inputs) total += t.records.size();
    out.records.reserve(total);
    for (const Trace& t : inputs) {
        for (const DciRecord& r : t.records) {
            auto [it, inserted] = owner.emplace(r.rnti, &t);
            if (!inserted && it->second != &t) {
                const auto& a = it->second->meta.label;
                const auto& b = t.meta.label;
                if (a != b)
                    throw std::runtime_error(
                        "RNTI " + rnti_hex(r.rnti) + " appears in traces with different labels ('" +
                        (a ? *a : "<none>") + "' vs '" + (b ? *b : "<none>") +
                        "'); assign distinct RNTIs before merging");
            }
            out.records.push_back(r);
        }
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const DciRecord& a, const DciRecord& b) { return a.t_ms < b.t_ms; });

    auto unanimous = [&](auto proj) {
        auto first = inputs.empty() ? decltype(proj(inputs[0])){} : proj(inputs[0]);
        for (const Trace& t : inputs)
            if (proj(t) != first) return decltype(first){};
        return first;
    };
    out.meta.label = unanimous([](const Trace& t) { return t.meta.label; });
    out.meta.capture_ratio = unanimous([](const Trace& t) { return t.meta.capture_ratio; });
    out.meta.seed = unanimous([](const Trace& t) { return t.meta.seed; });
    return out;
}

}  // namespace dcifp
