#include "dcifp/profiles.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dcifp {
namespace {

double parse_num(const std::string& s, const std::string& where) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::runtime_error(where + ": bad number '" + s + "'");
    return v;
}

std::pair<std::string, std::string> split_pair(const std::string& s, char sep,
                                               const std::string& where) {
    size_t pos = s.find(sep);
    if (pos == std::string::npos)
        throw std::runtime_error(where + ": expected '" + std::string(1, sep) + "' in '" + s + "'");
    return {s.substr(0, pos), s.substr(pos + 1)};
}

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("number format failure");
    return std::string(buf, p);
}

AppProfile streaming(AppLabel name, Range interval_s, Range duration_ms, CountRange per_burst,
                     double tbs_dl_median, double tbs_dl_sigma, double ul_fraction) {
    AppProfile p;
    p.name = std::move(name);
    p.kind = TrafficKind::BURST_STREAMING;
    p.burst_interval_s = interval_s;
    p.burst_duration_ms = duration_ms;
    p.instances_per_burst = per_burst;
    p.tbs_dl_bits = {std::log(tbs_dl_median), tbs_dl_sigma};
    p.tbs_ul_bits = {std::log(2000.0), 0.4};  // sparse uplink acknowledgements
    p.ul_fraction = ul_fraction;
    return p;
}

AppProfile voip(AppLabel name, Range period_ms, double tbs_median, double tbs_sigma) {
    AppProfile p;
    p.name = std::move(name);
    p.kind = TrafficKind::CONTINUOUS_VOIP;
    p.voip_period_ms = period_ms;
    p.tbs_dl_bits = {std::log(tbs_median), tbs_sigma};
    p.tbs_ul_bits = {std::log(tbs_median), tbs_sigma};
    p.ul_fraction = 0.5;  // bidirectional call
    return p;
}

}  // namespace

void validate_profile(const AppProfile& p) {
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("profile '" + p.name + "': " + msg);
    };
    if (p.name.empty()) throw std::runtime_error("profile with empty name");
    if (!(p.ul_fraction >= 0.0 && p.ul_fraction <= 1.0)) fail("ul_fraction outside [0,1]");
    if (p.tbs_dl_bits.sigma < 0 || p.tbs_ul_bits.sigma < 0) fail("negative tbs sigma");
    if (p.kind == TrafficKind::BURST_STREAMING) {
        if (!(p.burst_interval_s.lo > 0 && p.burst_interval_s.lo <= p.burst_interval_s.hi))
            fail("burst_interval_s range empty or nonpositive");
        if (!(p.burst_duration_ms.lo > 0 && p.burst_duration_ms.lo <= p.burst_duration_ms.hi))
            fail("burst_duration_ms range empty or nonpositive");
        if (p.burst_duration_ms.hi >= 1000.0) fail("bursts must stay under one second");
        if (!(p.instances_per_burst.lo >= 1 && p.instances_per_burst.lo <= p.instances_per_burst.hi))
            fail("instances_per_burst range empty");
    } else {
        if (!(p.voip_period_ms.lo > 0 && p.voip_period_ms.lo <= p.voip_period_ms.hi))
            fail("voip_period_ms range empty or nonpositive");
    }
}

const std::map<AppLabel, AppProfile>& builtin_profiles() {
    // Calibrated jointly: burst gap ranges follow the published per-app
    // intervals; instance counts and block sizes are set so that, after
    // 5-10% capture, per-app window fill times keep the published ordering
    // (short-interval video and VoIP fast, audio slow) and no background
    // app's captured allocation can cross the signature-detection
    // thresholds within a 2 s inspection window.
    static const std::map<AppLabel, AppProfile> profiles = [] {
        std::map<AppLabel, AppProfile> m;
        auto add = [&m](AppProfile p) {
            validate_profile(p);
            m.emplace(p.name, std::move(p));
        };
        add(streaming("YouTube", {10, 15}, {300, 900}, {250, 500}, 45000, 0.55, 0.2));
        add(streaming("Netflix", {50, 60}, {500, 950}, {1500, 2100}, 40000, 0.5, 0.2));
        add(streaming("Disney+", {5, 10}, {300, 800}, {700, 980}, 28000, 0.5, 0.2));
        add(streaming("PrimeVideo", {5, 10}, {300, 800}, {2400, 3200}, 20000, 0.5, 0.2));
        // Audio pair: same gap range, same block sizes, matched in-burst
        // instance spacing (duration/count); they differ only in burst
        // instance count and uplink share, so telling them apart needs a
        // wide window — mirroring the published hard pair.
        add(streaming("YTMusic", {60, 120}, {400, 600}, {700, 950}, 18000, 0.45, 0.15));
        add(streaming("Spotify", {60, 120}, {250, 390}, {450, 600}, 18000, 0.45, 0.25));
        add(voip("WhatsApp", {16, 24}, 1400, 0.35));
        add(voip("Telegram", {10, 14}, 1400, 0.35));
        return m;
    }();
    return profiles;
}

std::map<AppLabel, AppProfile> read_profiles_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profiles file: " + path);
    std::map<AppLabel, AppProfile> out;
    AppProfile cur;
    bool have_section = false;
    auto flush = [&] {
        if (!have_section) return;
        validate_profile(cur);
        if (!out.emplace(cur.name, cur).second)
            throw std::runtime_error(path + ": duplicate profile '" + cur.name + "'");
    };
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string where = path + ":" + std::to_string(line_no);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::runtime_error(where + ": unterminated section header");
            flush();
            cur = AppProfile{};
            cur.name = line.substr(1, line.size() - 2);
            have_section = true;
            continue;
        }
        if (!have_section) throw std::runtime_error(where + ": key outside a [profile] section");
        auto [key, value] = split_pair(line, '=', where);
        auto range = [&] {
            auto [a, b] = split_pair(value, ',', where);
            return Range{parse_num(a, where), parse_num(b, where)};
        };
        if (key == "kind") {
            if (value == "burst_streaming") cur.kind = TrafficKind::BURST_STREAMING;
            else if (value == "continuous_voip") cur.kind = TrafficKind::CONTINUOUS_VOIP;
            else throw std::runtime_error(where + ": unknown kind '" + value + "'");
        } else if (key == "burst_interval_s") {
            cur.burst_interval_s = range();
        } else if (key == "burst_duration_ms") {
            cur.burst_duration_ms = range();
        } else if (key == "instances_per_burst") {
            auto [a, b] = split_pair(value, ',', where);
            cur.instances_per_burst = {static_cast<uint32_t>(parse_num(a, where)),
                                       static_cast<uint32_t>(parse_num(b, where))};
        } else if (key == "tbs_dl_lognormal") {
            auto [a, b] = split_pair(value, ',', where);
            cur.tbs_dl_bits = {parse_num(a, where), parse_num(b, where)};
        } else if (key == "tbs_ul_lognormal") {
            auto [a, b] = split_pair(value, ',', where);
            cur.tbs_ul_bits = {parse_num(a, where), parse_num(b, where)};
        } else if (key == "ul_fraction") {
            cur.ul_fraction = parse_num(value, where);
        } else if (key == "voip_period_ms") {
            cur.voip_period_ms = range();
        } else {
            throw std::runtime_error(where + ": unknown key '" + key + "'");
        }
    }
    flush();
    return out;
}

void write_profiles_file(const std::string& path, const std::map<AppLabel, AppProfile>& profiles) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open profiles file for write: " + path);
    out << "# Traffic profiles. tbs_*_lognormal are (mu, sigma) of log(bits).\n";
    for (const auto& [name, p] : profiles) {
        out << "[" << name << "]\n";
        out << "kind=" << (p.kind == TrafficKind::BURST_STREAMING ? "burst_streaming"
                                                                  : "continuous_voip")
            << "\n";
        if (p.kind == TrafficKind::BURST_STREAMING) {
            out << "burst_interval_s=" << fmt(p.burst_interval_s.lo) << ","
                << fmt(p.burst_interval_s.hi) << "\n";
            out << "burst_duration_ms=" << fmt(p.burst_duration_ms.lo) << ","
                << fmt(p.burst_duration_ms.hi) << "\n";
            out << "instances_per_burst=" << p.instances_per_burst.lo << ","
                << p.instances_per_burst.hi << "\n";
        } else {
            out << "voip_period_ms=" << fmt(p.voip_period_ms.lo) << "," << fmt(p.voip_period_ms.hi)
                << "\n";
        }
        out << "tbs_dl_lognormal=" << fmt(p.tbs_dl_bits.mu) << "," << fmt(p.tbs_dl_bits.sigma)
            << "\n";
        out << "tbs_ul_lognormal=" << fmt(p.tbs_ul_bits.mu) << "," << fmt(p.tbs_ul_bits.sigma)
            << "\n";
        out << "ul_fraction=" << fmt(p.ul_fraction) << "\n\n";
    }
    if (!out) throw std::runtime_error("profiles write failure: " + path);
}

}  // namespace dcifp
