#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dcifp/dci.hpp"

namespace dcifp {

// Text trace format, one record per line:
//   t_ms,rnti_hex,direction,tbs_bits,rb_count,dci_format
// Lines starting with '#' hold key=value metadata (label, capture_ratio,
// seed). Unknown metadata keys and out-of-order input are tolerated; each
// pushes a note onto *warnings when the caller provides it.
Trace read_trace(std::istream& in, std::vector<std::string>* warnings = nullptr);
Trace read_trace_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

void write_trace(std::ostream& out, const Trace& t);
void write_trace_file(const std::string& path, const Trace& t);

// Merge several traces into one time-sorted trace (stable for equal
// timestamps: inputs earlier in the list come first). Throws if the same
// RNTI appears in two inputs whose labels differ — such a merge would
// assign one UE two ground truths. Metadata: label kept only if unanimous,
// capture_ratio kept only if unanimous, seed dropped unless unanimous.
Trace merge_traces(const std::vector<Trace>& inputs);

}  // namespace dcifp
