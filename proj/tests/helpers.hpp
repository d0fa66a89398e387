#pragma once

#include <random>

#include "dualstack/ip.hpp"

namespace testutil {

inline dualstack::IpAddress random_address(std::mt19937_64& rng) {
    if (rng() & 1) return dualstack::IpAddress::from_v4(static_cast<std::uint32_t>(rng()));
    return dualstack::IpAddress::from_bits({rng(), rng()});
}

inline dualstack::IpAddress random_v6(std::mt19937_64& rng) {
    dualstack::IpBits bits{rng(), rng()};
    if (dualstack::IpAddress::from_bits(bits).family() == dualstack::Family::V4) bits.hi = 1;
    return dualstack::IpAddress::from_bits(bits);
}

// Bit-by-bit reference for common_prefix_len, independent of the
// countl_zero path.
inline int cpl_reference(const dualstack::IpAddress& a, const dualstack::IpAddress& b) {
    auto bit = [](dualstack::IpBits v, int i) -> int {
        return i < 64 ? (v.hi >> (63 - i)) & 1 : (v.lo >> (127 - i)) & 1;
    };
    for (int i = 0; i < 128; ++i)
        if (bit(a.bits(), i) != bit(b.bits(), i)) return i;
    return 128;
}

} // namespace testutil
