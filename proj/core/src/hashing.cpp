#include "lsfkit/hashing.hpp"

#include <cstring>

namespace lsfkit {

KeyDigest digest(std::span<const std::byte> keyBytes, uint64_t seed) noexcept {
    uint64_t h = kFnvOffset;
    for (std::byte b : keyBytes) {
        h ^= static_cast<uint64_t>(b);
        h *= kFnvPrime;
    }
    return KeyDigest{finalize(h ^ seed)};
}

KeyDigest digest(std::string_view key, uint64_t seed) noexcept {
    return digest(std::as_bytes(std::span(key.data(), key.size())), seed);
}

bool RibbonParams::valid() const noexcept {
    return w >= 1 && w <= 64 && m >= w && bucketSize >= 1 && ribbons >= 1 &&
           numStarts() % bucketSize == 0;
}

RibbonParts deriveParts(KeyDigest d, const RibbonParams &params) noexcept {
    RibbonParts parts;
    parts.start = rangeMap(remix(d.value, 1), params.numStarts());
    uint64_t c = remix(d.value, 2);
    if (params.w < 64)
        c &= (uint64_t{1} << params.w) - 1;
    parts.coeffs = c | 1U;
    parts.bucket = parts.start / params.bucketSize;
    parts.offset = static_cast<uint32_t>(parts.start % params.bucketSize);
    return parts;
}

uint32_t ribbonOffset(KeyDigest d, uint32_t ribbons) noexcept {
    return static_cast<uint32_t>(remix(d.value, 3) % ribbons);
}

} // namespace lsfkit
