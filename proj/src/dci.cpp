#include "dcifp/dci.hpp"

#include <charconv>

namespace dcifp {

void validate_record(const DciRecord& r) {
    if (r.tbs_bits == 0)
        throw std::runtime_error("DCI record has tbs_bits == 0");
    if (r.rb_count == 0)
        throw std::runtime_error("DCI record has rb_count == 0");
    if (direction_for(r.dci_format) != r.direction)
        throw std::runtime_error(std::string("DCI direction/format mismatch: ") +
                                 to_token(r.direction) + " with " + to_token(r.dci_format));
}

const std::vector<AppLabel>& default_app_labels() {
    static const std::vector<AppLabel> labels = {
        "YouTube", "Netflix", "Disney+", "PrimeVideo",
        "YTMusic", "Spotify", "WhatsApp", "Telegram",
    };
    return labels;
}

std::string rnti_hex(uint16_t rnti) {
    static const char* digits = "0123456789ABCDEF";
    std::string s(4, '0');
    for (int i = 3; i >= 0; --i) {
        s[i] = digits[rnti & 0xF];
        rnti >>= 4;
    }
    return s;
}

uint16_t parse_rnti_hex(const std::string& s) {
    if (s.size() != 4)
        throw std::runtime_error("RNTI must be 4 hex digits, got '" + s + "'");
    uint16_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + 4, v, 16);
    if (ec != std::errc() || p != s.data() + 4)
        throw std::runtime_error("bad RNTI '" + s + "'");
    return v;
}

}  // namespace dcifp
