#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcifp {

enum class Direction : uint8_t { DL, UL };

// 0_0 schedules an uplink grant, 1_0 a downlink assignment.
enum class DciFormat : uint8_t { F0_0, F1_0 };

inline Direction direction_for(DciFormat f) {
    return f == DciFormat::F0_0 ? Direction::UL : Direction::DL;
}

inline const char* to_token(Direction d) { return d == Direction::DL ? "DL" : "UL"; }
inline const char* to_token(DciFormat f) { return f == DciFormat::F0_0 ? "F0_0" : "F1_0"; }

// One scheduling decision as seen on the control channel.
struct DciRecord {
    uint64_t t_ms = 0;       // milliseconds since trace epoch
    uint16_t rnti = 0;
    Direction direction = Direction::DL;
    uint64_t tbs_bits = 0;   // transport block size
    uint32_t rb_count = 0;   // resource blocks allocated
    DciFormat dci_format = DciFormat::F1_0;

    bool operator==(const DciRecord&) const = default;
};

// Throws if the record violates field constraints or the direction/format
// coupling (direction is stored explicitly because it is a model feature,
// so consistency has to be enforced).
void validate_record(const DciRecord& r);

struct TraceMeta {
    std::optional<std::string> label;
    std::optional<double> capture_ratio;
    std::optional<uint64_t> seed;

    bool operator==(const TraceMeta&) const = default;
};

// An ordered sequence of DCI records. Immutable by convention once built;
// helpers that change it return a new Trace.
struct Trace {
    std::vector<DciRecord> records;
    TraceMeta meta;

    bool operator==(const Trace&) const = default;

    bool sorted() const {
        for (size_t i = 1; i < records.size(); ++i)
            if (records[i].t_ms < records[i - 1].t_ms) return false;
        return true;
    }
    uint64_t span_ms() const {
        return records.empty() ? 0 : records.back().t_ms - records.front().t_ms;
    }
};

using AppLabel = std::string;

// Canonical class set; model files may carry any subset/ordering but this
// is the default everywhere.
const std::vector<AppLabel>& default_app_labels();

// Renders an RNTI the way trace files store it (4 hex digits, upper case).
std::string rnti_hex(uint16_t rnti);
uint16_t parse_rnti_hex(const std::string& s);

}  // namespace dcifp
