#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "dualstack/error.hpp"

namespace dualstack {

// 128-bit address value. Bit 0 is the most significant bit of hi.
struct IpBits {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend constexpr auto operator<=>(const IpBits&, const IpBits&) = default;

    constexpr IpBits operator^(const IpBits& o) const { return {hi ^ o.hi, lo ^ o.lo}; }

    // Keeps the top len bits, zeroes the rest.
    constexpr IpBits truncated(int len) const {
        if (len <= 0) return {};
        if (len >= 128) return *this;
        if (len < 64) return {hi & (~0ULL << (64 - len)), 0};
        if (len == 64) return {hi, 0};
        return {hi, lo & (~0ULL << (128 - len))};
    }

    constexpr bool is_zero() const { return hi == 0 && lo == 0; }
};

constexpr int leading_zero_bits(IpBits v) {
    if (v.hi != 0) return std::countl_zero(v.hi);
    if (v.lo != 0) return 64 + std::countl_zero(v.lo);
    return 128;
}

enum class Family { V4, V6 };

constexpr std::string_view to_string(Family f) { return f == Family::V4 ? "v4" : "v6"; }

namespace detail {

// ::ffff:0:0/96, the mapped block that carries IPv4 internally.
constexpr IpBits kMappedBase{0, 0x0000'ffff'0000'0000ULL};

constexpr bool in_mapped_block(IpBits b) {
    return b.hi == 0 && (b.lo >> 32) == 0x0000'ffffULL;
}

inline std::uint32_t parse_dotted_quad(std::string_view text) {
    std::uint32_t value = 0;
    int octets = 0;
    std::size_t pos = 0;
    while (true) {
        std::size_t dot = text.find('.', pos);
        std::string_view part = text.substr(pos, dot == std::string_view::npos ? dot : dot - pos);
        if (part.empty() || part.size() > 3)
            throw ParseError("bad IPv4 literal: '" + std::string(text) + "'");
        if (part.size() > 1 && part[0] == '0')
            throw ParseError("bad IPv4 literal (leading zero): '" + std::string(text) + "'");
        unsigned octet = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), octet);
        if (ec != std::errc() || ptr != part.data() + part.size() || octet > 255)
            throw ParseError("bad IPv4 literal: '" + std::string(text) + "'");
        value = (value << 8) | octet;
        ++octets;
        if (dot == std::string_view::npos) break;
        if (octets == 4)
            throw ParseError("bad IPv4 literal: '" + std::string(text) + "'");
        pos = dot + 1;
    }
    if (octets != 4)
        throw ParseError("bad IPv4 literal: '" + std::string(text) + "'");
    return value;
}

inline std::string format_dotted_quad(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (v >> 24) & 0xff, (v >> 16) & 0xff,
                  (v >> 8) & 0xff, v & 0xff);
    return buf;
}

// RFC 5952 text: compress the longest run of two or more zero groups,
// leftmost on ties.
inline std::string format_v6(IpBits bits) {
    std::array<std::uint16_t, 8> g;
    for (int i = 0; i < 4; ++i) g[i] = static_cast<std::uint16_t>(bits.hi >> (48 - 16 * i));
    for (int i = 0; i < 4; ++i) g[4 + i] = static_cast<std::uint16_t>(bits.lo >> (48 - 16 * i));
    int best_start = -1, best_len = 0;
    for (int i = 0; i < 8;) {
        if (g[i] != 0) {
            ++i;
            continue;
        }
        int j = i;
        while (j < 8 && g[j] == 0) ++j;
        if (j - i > best_len) {
            best_start = i;
            best_len = j - i;
        }
        i = j;
    }
    std::string out;
    char buf[8];
    auto append_run = [&](int from, int to) {
        for (int i = from; i < to; ++i) {
            if (i > from) out += ':';
            std::snprintf(buf, sizeof(buf), "%x", g[i]);
            out += buf;
        }
    };
    if (best_len >= 2) {
        append_run(0, best_start);
        out += "::";
        append_run(best_start + best_len, 8);
    } else {
        append_run(0, 8);
    }
    return out;
}

inline std::uint16_t parse_hex_group(std::string_view part, std::string_view whole) {
    if (part.empty() || part.size() > 4)
        throw ParseError("bad IPv6 literal: '" + std::string(whole) + "'");
    unsigned group = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), group, 16);
    if (ec != std::errc() || ptr != part.data() + part.size())
        throw ParseError("bad IPv6 literal: '" + std::string(whole) + "'");
    return static_cast<std::uint16_t>(group);
}

// Splits a (possibly empty) colon-joined group list. An empty input yields
// no tokens; empty tokens inside are errors.
inline void append_groups(std::string_view part, std::string_view whole, bool allow_v4_tail,
                          std::array<std::uint16_t, 8>& out, int& count) {
    if (part.empty()) return;
    std::size_t pos = 0;
    while (true) {
        std::size_t colon = part.find(':', pos);
        std::string_view tok =
            part.substr(pos, colon == std::string_view::npos ? colon : colon - pos);
        bool last = colon == std::string_view::npos;
        if (count >= 8)
            throw ParseError("bad IPv6 literal: '" + std::string(whole) + "'");
        if (last && allow_v4_tail && tok.find('.') != std::string_view::npos) {
            if (count >= 7)
                throw ParseError("bad IPv6 literal: '" + std::string(whole) + "'");
            std::uint32_t v4 = parse_dotted_quad(tok);
            out[count++] = static_cast<std::uint16_t>(v4 >> 16);
            out[count++] = static_cast<std::uint16_t>(v4 & 0xffff);
        } else {
            out[count++] = parse_hex_group(tok, whole);
        }
        if (last) break;
        pos = colon + 1;
    }
}

inline IpBits parse_v6(std::string_view text) {
    std::size_t dc = text.find("::");
    std::array<std::uint16_t, 8> groups{};
    if (dc == std::string_view::npos) {
        int count = 0;
        append_groups(text, text, true, groups, count);
        if (count != 8)
            throw ParseError("bad IPv6 literal: '" + std::string(text) + "'");
    } else {
        std::string_view left = text.substr(0, dc);
        std::string_view right = text.substr(dc + 2);
        if (right.find("::") != std::string_view::npos)
            throw ParseError("bad IPv6 literal: '" + std::string(text) + "'");
        std::array<std::uint16_t, 8> lg{}, rg{};
        int lc = 0, rc = 0;
        append_groups(left, text, false, lg, lc);
        append_groups(right, text, true, rg, rc);
        if (lc + rc > 7)
            throw ParseError("bad IPv6 literal: '" + std::string(text) + "'");
        for (int i = 0; i < lc; ++i) groups[i] = lg[i];
        for (int i = 0; i < rc; ++i) groups[8 - rc + i] = rg[i];
    }
    IpBits bits;
    for (int i = 0; i < 4; ++i) bits.hi = (bits.hi << 16) | groups[i];
    for (int i = 4; i < 8; ++i) bits.lo = (bits.lo << 16) | groups[i];
    return bits;
}

} // namespace detail

// One address of either family. IPv4 is carried in the mapped block
// (::ffff:0:0/96) so prefix matching and common-prefix math use a single
// 128-bit code path; family is derived from the raw value.
class IpAddress {
public:
    constexpr IpAddress() = default;

    static IpAddress parse(std::string_view text) {
        if (text.find(':') != std::string_view::npos) {
            if (text.find('%') != std::string_view::npos)
                throw ParseError("zone indices not supported: '" + std::string(text) + "'");
            return IpAddress(detail::parse_v6(text));
        }
        return from_v4(detail::parse_dotted_quad(text));
    }

    static std::optional<IpAddress> try_parse(std::string_view text) {
        try {
            return parse(text);
        } catch (const ParseError&) {
            return std::nullopt;
        }
    }

    static constexpr IpAddress from_bits(IpBits bits) { return IpAddress(bits); }

    static constexpr IpAddress from_v4(std::uint32_t host_order) {
        return IpAddress({0, detail::kMappedBase.lo | host_order});
    }

    constexpr IpBits bits() const { return bits_; }

    constexpr Family family() const {
        return detail::in_mapped_block(bits_) ? Family::V4 : Family::V6;
    }

    constexpr std::uint32_t v4() const { return static_cast<std::uint32_t>(bits_.lo & 0xffffffffULL); }

    std::string str() const {
        if (family() == Family::V4) return detail::format_dotted_quad(v4());
        return detail::format_v6(bits_);
    }

    std::array<std::uint16_t, 8> groups() const {
        std::array<std::uint16_t, 8> g;
        for (int i = 0; i < 4; ++i) g[i] = static_cast<std::uint16_t>(bits_.hi >> (48 - 16 * i));
        for (int i = 0; i < 4; ++i) g[4 + i] = static_cast<std::uint16_t>(bits_.lo >> (48 - 16 * i));
        return g;
    }

    friend constexpr auto operator<=>(const IpAddress&, const IpAddress&) = default;

private:
    explicit constexpr IpAddress(IpBits bits) : bits_(bits) {}

    IpBits bits_;
};

inline int common_prefix_len(const IpAddress& a, const IpAddress& b) {
    if (a.family() != b.family())
        throw ConfigError("common prefix length is undefined across families");
    return leading_zero_bits(a.bits() ^ b.bits());
}

// A CIDR block over the shared 128-bit space. IPv4 prefixes are stored
// mapped with length widened by 96; v4_form only affects str().
struct Prefix {
    IpBits base;
    int length = 0;
    bool v4_form = false;

    static Prefix parse(std::string_view text) {
        std::size_t slash = text.find('/');
        if (slash == std::string_view::npos)
            throw ParseError("prefix missing '/': '" + std::string(text) + "'");
        IpAddress addr = IpAddress::parse(text.substr(0, slash));
        std::string_view len_part = text.substr(slash + 1);
        int len = 0;
        auto [ptr, ec] = std::from_chars(len_part.data(), len_part.data() + len_part.size(), len);
        if (ec != std::errc() || ptr != len_part.data() + len_part.size())
            throw ParseError("bad prefix length: '" + std::string(text) + "'");
        bool v4 = text.substr(0, slash).find(':') == std::string_view::npos;
        int max_len = v4 ? 32 : 128;
        if (len < 0 || len > max_len)
            throw ParseError("bad prefix length: '" + std::string(text) + "'");
        if (v4) len += 96;
        IpBits base = addr.bits();
        if (base != base.truncated(len))
            throw ParseError("prefix has host bits set: '" + std::string(text) + "'");
        return Prefix{base, len, v4};
    }

    constexpr bool contains(IpBits addr) const { return addr.truncated(length) == base; }
    constexpr bool contains(const IpAddress& addr) const { return contains(addr.bits()); }

    std::string str() const {
        char buf[16];
        if (v4_form) {
            std::snprintf(buf, sizeof(buf), "/%d", length - 96);
            return detail::format_dotted_quad(
                       static_cast<std::uint32_t>(base.lo & 0xffffffffULL)) +
                   buf;
        }
        std::snprintf(buf, sizeof(buf), "/%d", length);
        return detail::format_v6(base) + buf;
    }

    friend constexpr bool operator==(const Prefix& a, const Prefix& b) {
        return a.base == b.base && a.length == b.length;
    }
};

enum class AddressClass {
    Loopback,
    LinkLocalV4,
    LinkLocalV6,
    PrivateV4,
    PublicV4,
    Gua,
    Ula,
    Tla,
    SiteLocal,
    TransitionOther,
};

inline std::string_view to_string(AddressClass c) {
    switch (c) {
    case AddressClass::Loopback: return "loopback";
    case AddressClass::LinkLocalV4: return "link-local-v4";
    case AddressClass::LinkLocalV6: return "link-local-v6";
    case AddressClass::PrivateV4: return "private-v4";
    case AddressClass::PublicV4: return "public-v4";
    case AddressClass::Gua: return "gua";
    case AddressClass::Ula: return "ula";
    case AddressClass::Tla: return "tla";
    case AddressClass::SiteLocal: return "site-local";
    case AddressClass::TransitionOther: return "transition-other";
    }
    return "?";
}

inline std::optional<AddressClass> address_class_from_string(std::string_view s) {
    for (AddressClass c :
         {AddressClass::Loopback, AddressClass::LinkLocalV4, AddressClass::LinkLocalV6,
          AddressClass::PrivateV4, AddressClass::PublicV4, AddressClass::Gua, AddressClass::Ula,
          AddressClass::Tla, AddressClass::SiteLocal, AddressClass::TransitionOther}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

// Total over all addresses: every input lands in exactly one class.
inline AddressClass classify(const IpAddress& addr) {
    if (addr.family() == Family::V4) {
        std::uint32_t v = addr.v4();
        if ((v >> 24) == 127) return AddressClass::Loopback;
        if ((v >> 16) == 0xa9fe) return AddressClass::LinkLocalV4;
        if ((v >> 24) == 10 || (v >> 20) == 0xac1 || (v >> 16) == 0xc0a8)
            return AddressClass::PrivateV4;
        return AddressClass::PublicV4;
    }
    IpBits b = addr.bits();
    if (b.hi == 0 && b.lo == 1) return AddressClass::Loopback;
    std::uint32_t top16 = static_cast<std::uint32_t>(b.hi >> 48);
    if ((top16 >> 6) == (0xfe80 >> 6)) return AddressClass::LinkLocalV6;
    if ((top16 >> 6) == (0xfec0 >> 6)) return AddressClass::SiteLocal;
    if ((top16 >> 8) == 0xfd) return AddressClass::Ula;
    if ((top16 >> 8) == 0xfc) return AddressClass::Tla;
    if (top16 == 0x2002) return AddressClass::TransitionOther;
    if ((b.hi >> 32) == 0x2001'0000ULL) return AddressClass::TransitionOther;
    if ((top16 >> 13) == 1) return AddressClass::Gua;
    return AddressClass::TransitionOther;
}

// Coarse scope lattice used by the selection rules.
enum class Scope { Loopback = 0, LinkLocal = 1, Global = 2 };

inline std::string_view to_string(Scope s) {
    switch (s) {
    case Scope::Loopback: return "loopback";
    case Scope::LinkLocal: return "link-local";
    case Scope::Global: return "global";
    }
    return "?";
}

inline Scope scope_of(const IpAddress& addr) {
    switch (classify(addr)) {
    case AddressClass::Loopback: return Scope::Loopback;
    case AddressClass::LinkLocalV4:
    case AddressClass::LinkLocalV6: return Scope::LinkLocal;
    default: return Scope::Global;
    }
}

} // namespace dualstack
