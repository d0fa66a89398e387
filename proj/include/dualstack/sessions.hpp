#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dualstack/error.hpp"
#include "dualstack/ip.hpp"
#include "dualstack/prefix_map.hpp"

namespace dualstack {

// One connection observation from a paired-address log.
struct Session {
    std::int64_t timestamp = 0; // UTC seconds
    std::string session_id;
    std::optional<IpAddress> v4;
    std::optional<IpAddress> v6;
    Family preferred = Family::V4;

    friend bool operator==(const Session&, const Session&) = default;
};

// Collapses repeats of the same (v4, v6) pair within one UTC hour, keeping
// the earliest observation. Output preserves the input order of the kept
// sessions, so the operation is idempotent.
inline std::vector<Session> dedupe(const std::vector<Session>& sessions) {
    struct Key {
        IpBits v4, v6;
        bool has_v4, has_v6;
        std::int64_t hour;
        auto operator<=>(const Key&) const = default;
    };
    auto key_of = [](const Session& s) {
        return Key{s.v4 ? s.v4->bits() : IpBits{}, s.v6 ? s.v6->bits() : IpBits{},
                   s.v4.has_value(), s.v6.has_value(), s.timestamp / 3600};
    };
    std::map<Key, std::size_t> best; // key -> index of earliest session
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        Key k = key_of(sessions[i]);
        auto [it, fresh] = best.try_emplace(k, i);
        if (!fresh && sessions[i].timestamp < sessions[it->second].timestamp) it->second = i;
    }
    std::vector<Session> out;
    out.reserve(best.size());
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        auto it = best.find(key_of(sessions[i]));
        if (it->second == i) out.push_back(sessions[i]);
    }
    return out;
}

enum class SessionCategory {
    NonVpn,
    V4OnlyVpn,
    DualSafe,
    DualSafePrefetch,
    DualSafePartialDeployment,
    Leak,
};

inline std::string_view to_string(SessionCategory c) {
    switch (c) {
    case SessionCategory::NonVpn: return "non_vpn";
    case SessionCategory::V4OnlyVpn: return "v4_only";
    case SessionCategory::DualSafe: return "dual_safe";
    case SessionCategory::DualSafePrefetch: return "dual_safe_prefetch";
    case SessionCategory::DualSafePartialDeployment: return "dual_safe_partial";
    case SessionCategory::Leak: return "leak";
    }
    return "?";
}

// Lookup data the classifier runs against: VPN exit prefixes, AS prefixes,
// AS-to-organization and AS-to-category maps, and browser prefetch ranges.
struct Directory {
    PrefixMap<std::string> vpn;                       // exit prefix -> provider
    PrefixMap<std::uint32_t> as_prefix;               // prefix -> ASN
    std::map<std::uint32_t, std::string> org_of_asn;  // ASN -> organization id
    std::map<std::uint32_t, std::string> category_of_asn;
    PrefixMap<bool> prefetch;

    // Derived: every organization behind a provider's exit prefixes. Call
    // after the maps are filled.
    std::map<std::string, std::set<std::string>> provider_orgs;

    void finalize() {
        provider_orgs.clear();
        vpn.for_each([&](const Prefix& prefix, const std::string& provider) {
            auto hit = as_prefix.lookup(prefix.base);
            if (!hit) return;
            auto org = org_of_asn.find(*hit->value);
            if (org != org_of_asn.end()) provider_orgs[provider].insert(org->second);
        });
    }

    std::optional<std::uint32_t> asn_of(const IpAddress& addr) const {
        auto hit = as_prefix.lookup(addr);
        if (!hit) return std::nullopt;
        return *hit->value;
    }

    std::optional<std::string> org_of(const IpAddress& addr) const {
        auto asn = asn_of(addr);
        if (!asn) return std::nullopt;
        auto it = org_of_asn.find(*asn);
        if (it == org_of_asn.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::string> category_of(const IpAddress& addr) const {
        auto asn = asn_of(addr);
        if (!asn) return std::nullopt;
        auto it = category_of_asn.find(*asn);
        if (it == category_of_asn.end()) return std::nullopt;
        return it->second;
    }
};

struct Classification {
    SessionCategory category = SessionCategory::NonVpn;
    std::string provider;   // empty unless the v4 side hit the VPN directory
    bool unknown_as = false; // v6 present but outside every known AS prefix

    friend bool operator==(const Classification&, const Classification&) = default;
};

// Decision chain, first match wins:
//   1. no v4, or v4 outside the VPN directory        -> NonVpn
//   2. no v6                                          -> V4OnlyVpn
//   3. v6 inside a prefetch range                     -> DualSafePrefetch
//   4. v6 organization equals the provider's          -> DualSafePartialDeployment
//   5. v6 outside the VPN directory, different org,
//      and its AS is ISP-categorized                  -> Leak
//   6. anything else                                  -> DualSafe
// A v6 with no covering AS prefix can never affirm the leak criteria; it
// falls through to DualSafe and is flagged for the coverage diagnostic.
inline Classification classify_session(const Session& s, const Directory& dir) {
    if (!s.v4) return {SessionCategory::NonVpn, "", false};
    auto vpn_hit = dir.vpn.lookup(*s.v4);
    if (!vpn_hit) return {SessionCategory::NonVpn, "", false};
    std::string provider = *vpn_hit->value;

    if (!s.v6) return {SessionCategory::V4OnlyVpn, provider, false};

    if (dir.prefetch.contains(*s.v6)) return {SessionCategory::DualSafePrefetch, provider, false};

    bool unknown_as = !dir.asn_of(*s.v6).has_value();

    std::optional<std::string> v6_org = dir.org_of(*s.v6);
    if (v6_org) {
        bool same_org = false;
        if (auto v4_org = dir.org_of(*s.v4); v4_org && *v4_org == *v6_org) same_org = true;
        if (auto it = dir.provider_orgs.find(provider);
            it != dir.provider_orgs.end() && it->second.count(*v6_org))
            same_org = true;
        if (same_org) return {SessionCategory::DualSafePartialDeployment, provider, false};

        bool outside_vpn = !dir.vpn.contains(*s.v6);
        bool isp = false;
        if (auto cat = dir.category_of(*s.v6); cat && *cat == "ISP") isp = true;
        if (outside_vpn && isp) return {SessionCategory::Leak, provider, false};
    }

    return {SessionCategory::DualSafe, provider, unknown_as};
}

} // namespace dualstack
