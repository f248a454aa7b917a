#pragma once

#include <map>

#include "dcifp/profiles.hpp"
#include "dcifp/trace_io.hpp"

namespace dcifp {

// Synthesize one UE's DCI trace for duration_s seconds. Deterministic in
// (profile, duration_s, rnti, seed); the trace is labeled with the
// profile name and carries the seed in its metadata.
Trace generate(const AppProfile& profile, double duration_s, uint16_t rnti, uint64_t seed);

// Multi-UE cell trace: one generate() per RNTI with a per-UE seed derived
// from the master seed, merged time-ordered. Parallel across UEs when
// OpenMP is enabled; output is identical either way.
Trace generate_cell(const std::map<uint16_t, AppProfile>& assignment, double duration_s,
                    uint64_t seed);

}  // namespace dcifp
