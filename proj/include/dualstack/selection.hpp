#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "dualstack/error.hpp"
#include "dualstack/ip.hpp"
#include "dualstack/policy.hpp"

namespace dualstack {

struct SourceCandidate {
    IpAddress addr;
    bool deprecated = false;

    friend constexpr bool operator==(const SourceCandidate&, const SourceCandidate&) = default;
};

// A destination joined with its chosen source and the table-derived
// attributes the sort keys need.
struct CandidatePair {
    SourceCandidate source;
    IpAddress dest;
    int source_label = 0;
    int dest_label = 0;
    int dest_precedence = 0;
    int common_prefix = 0;

    Family family() const { return dest.family(); }

    friend constexpr bool operator==(const CandidatePair&, const CandidatePair&) = default;
};

inline CandidatePair make_pair(const SourceCandidate& source, const IpAddress& dest,
                               const PolicyTable& table) {
    PolicyEntry de = table.lookup(dest);
    return CandidatePair{source,
                         dest,
                         table.lookup(source.addr).label,
                         de.label,
                         de.precedence,
                         common_prefix_len(source.addr, dest)};
}

enum class SourceFailure { None, NoSameFamilySource, NoScopeMatch };

inline std::string_view to_string(SourceFailure f) {
    switch (f) {
    case SourceFailure::None: return "ok";
    case SourceFailure::NoSameFamilySource: return "no same-family source";
    case SourceFailure::NoScopeMatch: return "no source with matching scope";
    }
    return "?";
}

struct SourceSelection {
    std::optional<SourceCandidate> source;
    SourceFailure failure = SourceFailure::None;
};

namespace detail {

// Returns <0 if a is the better source for dest, >0 if b is, 0 on a tie.
// Rule order follows RFC 6724 section 5 (the subset modeled here).
inline int compare_sources(const SourceCandidate& a, const SourceCandidate& b,
                           const IpAddress& dest, const PolicyTable& table) {
    // Rule: prefer the destination address itself.
    bool a_same = a.addr == dest;
    bool b_same = b.addr == dest;
    if (a_same != b_same) return a_same ? -1 : 1;

    // Rule: prefer appropriate scope.
    Scope sa = scope_of(a.addr), sb = scope_of(b.addr), sd = scope_of(dest);
    if (sa != sb) {
        if (sa < sb) return sa < sd ? 1 : -1;
        return sb < sd ? -1 : 1;
    }

    // Rule: avoid deprecated addresses.
    if (a.deprecated != b.deprecated) return a.deprecated ? 1 : -1;

    // Rule: prefer matching label.
    int dest_label = table.lookup(dest).label;
    bool a_label = table.lookup(a.addr).label == dest_label;
    bool b_label = table.lookup(b.addr).label == dest_label;
    if (a_label != b_label) return a_label ? -1 : 1;

    // Rule: use longest matching prefix.
    int a_cpl = common_prefix_len(a.addr, dest);
    int b_cpl = common_prefix_len(b.addr, dest);
    if (a_cpl != b_cpl) return a_cpl > b_cpl ? -1 : 1;

    return 0;
}

} // namespace detail

// Picks the best source for dest among candidates; earlier candidates win
// ties. Never throws: failures come back in the result.
inline SourceSelection pick_source(const std::vector<SourceCandidate>& candidates,
                                   const IpAddress& dest, const PolicyTable& table) {
    std::vector<const SourceCandidate*> usable;
    bool same_family = false;
    Scope dest_scope = scope_of(dest);
    for (const SourceCandidate& c : candidates) {
        if (c.addr.family() != dest.family()) continue;
        same_family = true;
        // A destination below global scope is only reachable from a source
        // of the same scope; nothing global can route to ::1 or fe80::.
        if (dest_scope != Scope::Global && scope_of(c.addr) != dest_scope) continue;
        usable.push_back(&c);
    }
    if (usable.empty())
        return {std::nullopt,
                same_family ? SourceFailure::NoScopeMatch : SourceFailure::NoSameFamilySource};
    const SourceCandidate* best = usable.front();
    for (std::size_t i = 1; i < usable.size(); ++i)
        if (detail::compare_sources(*usable[i], *best, dest, table) < 0) best = usable[i];
    return {*best, SourceFailure::None};
}

inline SourceCandidate select_source(const std::vector<SourceCandidate>& candidates,
                                     const IpAddress& dest, const PolicyTable& table) {
    SourceSelection sel = pick_source(candidates, dest, table);
    if (!sel.source)
        throw NoRouteError(std::string(to_string(sel.failure)) + " for destination " + dest.str());
    return *sel.source;
}

enum class DestRule {
    MatchingScope,
    AvoidDeprecatedSource,
    MatchingLabel,
    DestPrecedence,
    CommonPrefix,
    InputOrder,
};

inline std::string_view to_string(DestRule r) {
    switch (r) {
    case DestRule::MatchingScope: return "matching scope";
    case DestRule::AvoidDeprecatedSource: return "avoid deprecated source";
    case DestRule::MatchingLabel: return "matching label";
    case DestRule::DestPrecedence: return "higher destination precedence";
    case DestRule::CommonPrefix: return "longer common prefix";
    case DestRule::InputOrder: return "input order";
    }
    return "?";
}

struct PairOrdering {
    int order = 0; // <0: a sorts first, >0: b sorts first, 0: tie
    DestRule rule = DestRule::InputOrder;
};

// Destination comparison, RFC 6724 section 6 subset. The deciding rule is
// reported so callers can explain an ordering.
inline PairOrdering compare_pairs(const CandidatePair& a, const CandidatePair& b) {
    bool a_scope = scope_of(a.dest) == scope_of(a.source.addr);
    bool b_scope = scope_of(b.dest) == scope_of(b.source.addr);
    if (a_scope != b_scope) return {a_scope ? -1 : 1, DestRule::MatchingScope};

    if (a.source.deprecated != b.source.deprecated)
        return {a.source.deprecated ? 1 : -1, DestRule::AvoidDeprecatedSource};

    bool a_label = a.source_label == a.dest_label;
    bool b_label = b.source_label == b.dest_label;
    if (a_label != b_label) return {a_label ? -1 : 1, DestRule::MatchingLabel};

    if (a.dest_precedence != b.dest_precedence)
        return {a.dest_precedence > b.dest_precedence ? -1 : 1, DestRule::DestPrecedence};

    // Common prefix length is only comparable within one family.
    if (a.family() == b.family() && a.common_prefix != b.common_prefix)
        return {a.common_prefix > b.common_prefix ? -1 : 1, DestRule::CommonPrefix};

    return {0, DestRule::InputOrder};
}

struct SortResult {
    struct Dropped {
        IpAddress dest;
        SourceFailure reason = SourceFailure::None;
    };

    std::vector<CandidatePair> pairs;
    std::vector<Dropped> dropped;
};

// Pairs every destination with its best source, drops the unreachable
// ones, and orders the rest. The sort is stable: input order breaks ties.
inline SortResult sort_destinations(const std::vector<IpAddress>& destinations,
                                    const std::vector<SourceCandidate>& sources,
                                    const PolicyTable& table) {
    SortResult result;
    for (const IpAddress& dest : destinations) {
        SourceSelection sel = pick_source(sources, dest, table);
        if (!sel.source) {
            result.dropped.push_back({dest, sel.failure});
            continue;
        }
        result.pairs.push_back(make_pair(*sel.source, dest, table));
    }
    std::stable_sort(result.pairs.begin(), result.pairs.end(),
                     [](const CandidatePair& a, const CandidatePair& b) {
                         return compare_pairs(a, b).order < 0;
                     });
    return result;
}

namespace detail {

inline IpAddress rank_representative(AddressClass c) {
    switch (c) {
    case AddressClass::Gua: return IpAddress::parse("2001:db8::1");
    case AddressClass::Ula: return IpAddress::parse("fd00::2");
    case AddressClass::PublicV4: return IpAddress::parse("203.0.113.10");
    case AddressClass::PrivateV4: return IpAddress::parse("10.0.0.2");
    default: throw std::logic_error("no rank representative for this class");
    }
}

// Sort key for one (source class, destination class) pair, best first.
// Label match and destination precedence come from the policy table; the
// family and locality tiers separate combinations the table scores alike.
struct RankKey {
    bool label_match = false;
    bool v6_dest = false;
    int dest_precedence = 0;
    bool same_class = false;
    bool global_dest = false;

    bool better_than(const RankKey& o) const {
        if (label_match != o.label_match) return label_match;
        if (v6_dest != o.v6_dest) return v6_dest;
        if (dest_precedence != o.dest_precedence) return dest_precedence > o.dest_precedence;
        if (same_class != o.same_class) return same_class;
        if (global_dest != o.global_dest) return global_dest;
        return false;
    }
};

inline RankKey rank_key(AddressClass src, AddressClass dst, const PolicyTable& table) {
    IpAddress s = rank_representative(src);
    IpAddress d = rank_representative(dst);
    RankKey key;
    key.label_match = table.lookup(s).label == table.lookup(d).label;
    key.v6_dest = d.family() == Family::V6;
    key.dest_precedence = table.lookup(d).precedence;
    key.same_class = src == dst;
    key.global_dest = dst == AddressClass::Gua || dst == AddressClass::PublicV4;
    return key;
}

} // namespace detail

// Ranks one of the six tabulated source/destination class combinations,
// 1 = most preferred. Anything else is an error.
inline int rank_pair_class(AddressClass src, AddressClass dst, const PolicyTable& table) {
    static constexpr std::pair<AddressClass, AddressClass> kRanked[] = {
        {AddressClass::Gua, AddressClass::Gua},
        {AddressClass::Ula, AddressClass::Ula},
        {AddressClass::PublicV4, AddressClass::PublicV4},
        {AddressClass::PrivateV4, AddressClass::PrivateV4},
        {AddressClass::PrivateV4, AddressClass::PublicV4},
        {AddressClass::Ula, AddressClass::Gua},
    };
    bool tabulated = false;
    for (const auto& [s, d] : kRanked)
        if (s == src && d == dst) tabulated = true;
    if (!tabulated)
        throw ConfigError("unranked pair class (" + std::string(to_string(src)) + ", " +
                          std::string(to_string(dst)) + ")");
    detail::RankKey own = detail::rank_key(src, dst, table);
    int rank = 1;
    for (const auto& [s, d] : kRanked) {
        if (s == src && d == dst) continue;
        if (detail::rank_key(s, d, table).better_than(own)) ++rank;
    }
    return rank;
}

} // namespace dualstack
