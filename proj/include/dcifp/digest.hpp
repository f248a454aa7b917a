#pragma once

#include <cstdint>
#include <string>

namespace dcifp {

// FNV-1a 64-bit; used for file fingerprints in manifests and for the
// model container's integrity trailer.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64_file(const std::string& path);
std::string hex64(uint64_t v);

}  // namespace dcifp
