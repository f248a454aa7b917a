#pragma once

#include "dcifp/train.hpp"

namespace dcifp {

// Versioned binary model container (little-endian, layout documented in
// docs/formats.md). load(save(b)) yields bit-identical predictions; a
// truncated or tampered file fails its integrity trailer and loads
// nothing.
void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

}  // namespace dcifp
