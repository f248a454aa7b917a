#include "dcifp/synth.hpp"

#include <algorithm>
#include <cmath>

#include "dcifp/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcifp {
namespace {

DciRecord make_instance(uint64_t t_ms, uint16_t rnti, const AppProfile& p, Rng& rng) {
    DciRecord r;
    r.t_ms = t_ms;
    r.rnti = rnti;
    bool ul = rng.bernoulli(p.ul_fraction);
    r.direction = ul ? Direction::UL : Direction::DL;
    r.dci_format = ul ? DciFormat::F0_0 : DciFormat::F1_0;
    const LogNormalSpec& tbs = ul ? p.tbs_ul_bits : p.tbs_dl_bits;
    r.tbs_bits = static_cast<uint64_t>(
        std::max<long long>(1, std::llround(rng.lognormal(tbs.mu, tbs.sigma))));
    double bits_per_rb = 800.0 * rng.uniform(0.75, 1.25);
    r.rb_count = static_cast<uint32_t>(std::max<long long>(1, std::llround(r.tbs_bits / bits_per_rb)));
    return r;
}

void generate_bursty(const AppProfile& p, double t_end_ms, uint16_t rnti, Rng& rng, Trace& out) {
    // random phase so bursts are not aligned across UEs
    double t = rng.uniform(0.0, p.burst_interval_s.hi * 1000.0);
    std::vector<double> offsets;
    while (t < t_end_ms) {
        uint32_t n = static_cast<uint32_t>(
            rng.uniform_int(p.instances_per_burst.lo, p.instances_per_burst.hi));
        double dur = rng.uniform(p.burst_duration_ms.lo, p.burst_duration_ms.hi);
        offsets.clear();
        for (uint32_t i = 0; i < n; ++i) offsets.push_back(rng.uniform(0.0, dur));
        std::sort(offsets.begin(), offsets.end());
        for (double off : offsets) {
            double ts = t + off;
            if (ts >= t_end_ms) break;
            out.records.push_back(make_instance(static_cast<uint64_t>(std::llround(ts)), rnti, p, rng));
        }
        t += dur + rng.uniform(p.burst_interval_s.lo, p.burst_interval_s.hi) * 1000.0;
    }
}

void generate_voip(const AppProfile& p, double t_end_ms, uint16_t rnti, Rng& rng, Trace& out) {
    double t = 0.0;  // calls schedule from the first millisecond
    while (t < t_end_ms) {
        out.records.push_back(make_instance(static_cast<uint64_t>(std::llround(t)), rnti, p, rng));
        t += rng.uniform(p.voip_period_ms.lo, p.voip_period_ms.hi);
    }
}

}  // namespace

Trace generate(const AppProfile& profile, double duration_s, uint16_t rnti, uint64_t seed) {
    validate_profile(profile);
    if (!(duration_s > 0)) throw std::runtime_error("generate: duration_s must be positive");
    Rng rng(mix_seed(seed, rnti));
    Trace out;
    double t_end_ms = duration_s * 1000.0;
    if (profile.kind == TrafficKind::BURST_STREAMING)
        generate_bursty(profile, t_end_ms, rnti, rng, out);
    else
        generate_voip(profile, t_end_ms, rnti, rng, out);
    // sorted by construction; rounding ties keep insertion order
    out.meta.label = profile.name;
    out.meta.seed = seed;
    return out;
}

Trace generate_cell(const std::map<uint16_t, AppProfile>& assignment, double duration_s,
                    uint64_t seed) {
    std::vector<std::pair<uint16_t, const AppProfile*>> ues;
    ues.reserve(assignment.size());
    for (const auto& [rnti, p] : assignment) {
        validate_profile(p);  // fail before the parallel region, which cannot throw
        ues.emplace_back(rnti, &p);
    }
    if (!(duration_s > 0)) throw std::runtime_error("generate_cell: duration_s must be positive");
    std::vector<Trace> per_ue(ues.size());
#pragma omp parallel for schedule(static)
    for (size_t i = 0; i < ues.size(); ++i)
        per_ue[i] = generate(*ues[i].second, duration_s, ues[i].first, seed);
    return merge_traces(per_ue);
}

}  // namespace dcifp
