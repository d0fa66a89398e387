#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualstack/csv.hpp"
#include "dualstack/error.hpp"
#include "dualstack/sessions.hpp"

namespace dualstack {

// Synthetic session-log corpus with known per-provider composition. The
// generator writes the log plus every directory file the classifier needs
// and a manifest recording the planted ground truth, so a pipeline run can
// be checked for exact recovery. Counts are planted, never sampled.
struct FixtureSpec {
    std::string out_dir;
    int days = 5;
    std::uint64_t seed = 42; // reserved; the corpus is fully deterministic
};

struct FixtureFiles {
    std::string sessions;
    std::string vpn;
    std::string as_prefixes;
    std::string orgs;
    std::string categories;
    std::string prefetch;
    std::string manifest;
};

namespace fixture_detail {

constexpr std::int64_t kEpoch = 1735689600; // 2025-01-01T00:00:00Z, day-aligned

enum class V6Space { None, ExitPool, Isp, Partner, Prefetch, Unmapped };

struct Block {
    const char* provider; // nullptr marks non-VPN traffic
    SessionCategory planted;
    int per_day;
    int pref_v4;          // first pref_v4 sessions of the block prefer v4
    std::uint32_t v4_net; // /16 base, 0 for v6-only sessions
    V6Space v6;
};

// Planted composition, per day. Providers cover the interesting shapes:
// a large mixed provider, v4-only providers whose dual-stack traffic is
// all leak, an all-safe provider, one just under the session threshold,
// one just under the dual-safe threshold, a partial deployment with a
// second ASN and unmapped v6 space, and a prefetch-heavy provider.
inline const std::vector<Block>& blocks() {
    static const std::vector<Block> kBlocks = {
        {"aurora-vpn", SessionCategory::V4OnlyVpn, 700, 0, 0x650a0000u, V6Space::None},
        {"aurora-vpn", SessionCategory::DualSafe, 1200, 648, 0x650a0000u, V6Space::ExitPool},
        {"aurora-vpn", SessionCategory::Leak, 100, 0, 0x650a0000u, V6Space::Isp},
        {"borealis-vpn", SessionCategory::V4OnlyVpn, 935, 0, 0x660a0000u, V6Space::None},
        {"borealis-vpn", SessionCategory::Leak, 65, 0, 0x660a0000u, V6Space::Isp},
        {"cascade-vpn", SessionCategory::V4OnlyVpn, 400, 0, 0x670a0000u, V6Space::None},
        {"cascade-vpn", SessionCategory::DualSafe, 5, 0, 0x670a0000u, V6Space::ExitPool},
        {"cascade-vpn", SessionCategory::Leak, 95, 0, 0x670a0000u, V6Space::Isp},
        {"drift-vpn", SessionCategory::DualSafe, 200, 26, 0x680a0000u, V6Space::ExitPool},
        {"ember-vpn", SessionCategory::V4OnlyVpn, 50, 0, 0x690a0000u, V6Space::None},
        {"ember-vpn", SessionCategory::DualSafe, 40, 20, 0x690a0000u, V6Space::ExitPool},
        {"ember-vpn", SessionCategory::Leak, 9, 0, 0x690a0000u, V6Space::Isp},
        {"fjord-vpn", SessionCategory::V4OnlyVpn, 181, 0, 0x6a0a0000u, V6Space::None},
        {"fjord-vpn", SessionCategory::DualSafe, 19, 7, 0x6a0a0000u, V6Space::ExitPool},
        {"glacier-vpn", SessionCategory::V4OnlyVpn, 50, 0, 0x6b0a0000u, V6Space::None},
        {"glacier-vpn", SessionCategory::DualSafe, 90, 40, 0x6b0a0000u, V6Space::ExitPool},
        {"glacier-vpn", SessionCategory::DualSafe, 10, 0, 0x6b0a0000u, V6Space::Unmapped},
        {"glacier-vpn", SessionCategory::DualSafePartialDeployment, 150, 60, 0x6b0a0000u,
         V6Space::Partner},
        {"glacier-vpn", SessionCategory::Leak, 10, 0, 0x6b0a0000u, V6Space::Isp},
        {"harbor-vpn", SessionCategory::DualSafe, 300, 150, 0x6c0a0000u, V6Space::ExitPool},
        {"harbor-vpn", SessionCategory::DualSafePrefetch, 60, 60, 0x6c0a0000u,
         V6Space::Prefetch},
        {"harbor-vpn", SessionCategory::Leak, 40, 0, 0x6c0a0000u, V6Space::Isp},
        {nullptr, SessionCategory::NonVpn, 4500, 0, 0x5bc80000u, V6Space::Isp},
        {nullptr, SessionCategory::NonVpn, 300, 0, 0u, V6Space::Isp},
        {nullptr, SessionCategory::NonVpn, 200, 0, 0x5bc90000u, V6Space::None},
    };
    return kBlocks;
}

constexpr int kDuplicatesPerDay = 11; // copies of the first aurora dual-safe sessions

inline std::uint64_t v6_hi(V6Space space, int rotation) {
    switch (space) {
    case V6Space::ExitPool: return 0x2001'4000'0000'0000ULL;
    case V6Space::Isp:
        return 0x2001'1000'0000'0000ULL + (static_cast<std::uint64_t>(rotation % 3) << 40);
    case V6Space::Partner: return 0x2001'3700'0000'0000ULL;
    case V6Space::Prefetch: return 0x2001'5000'0000'0000ULL;
    case V6Space::Unmapped: return 0x2001'6000'0000'0000ULL;
    case V6Space::None: break;
    }
    return 0;
}

} // namespace fixture_detail

// Writes the corpus under spec.out_dir and returns the manifest that was
// stored alongside it.
inline nlohmann::ordered_json generate_fixture(const FixtureSpec& spec,
                                               FixtureFiles* files_out = nullptr) {
    namespace fd = fixture_detail;
    if (spec.days < 1)
        throw ConfigError("fixture needs at least one day");

    std::filesystem::create_directories(spec.out_dir);
    auto path = [&](const char* name) {
        return (std::filesystem::path(spec.out_dir) / name).string();
    };

    int per_day_total = 0;
    for (const fd::Block& b : fd::blocks()) per_day_total += b.per_day;

    // --- session log ---
    std::vector<Session> rows;
    std::vector<Session> dup_bases;
    std::size_t session_serial = 0;
    for (int day = 0; day < spec.days; ++day) {
        int day_index = 0;
        std::map<std::string, std::uint32_t> v4_counter;
        std::map<fd::V6Space, std::uint64_t> v6_counter;
        std::uint32_t nonvpn_counter = 0;
        for (const fd::Block& b : fd::blocks()) {
            for (int i = 0; i < b.per_day; ++i, ++day_index) {
                Session s;
                s.timestamp = fd::kEpoch + static_cast<std::int64_t>(day) * 86400 +
                              static_cast<std::int64_t>(day_index) * 86400 / per_day_total;
                s.session_id = "s" + std::to_string(++session_serial);
                if (b.v4_net != 0) {
                    std::uint32_t& counter =
                        b.provider ? v4_counter[b.provider] : nonvpn_counter;
                    s.v4 = IpAddress::from_v4(b.v4_net | (0x100u + counter++));
                }
                if (b.v6 != fd::V6Space::None) {
                    std::uint64_t hi = fd::v6_hi(b.v6, day_index);
                    s.v6 = IpAddress::from_bits({hi, ++v6_counter[b.v6]});
                }
                bool is_safe_dual = b.planted == SessionCategory::DualSafe ||
                                    b.planted == SessionCategory::DualSafePrefetch ||
                                    b.planted == SessionCategory::DualSafePartialDeployment;
                if (is_safe_dual) {
                    s.preferred = i < b.pref_v4 ? Family::V4 : Family::V6;
                } else if (s.v4) {
                    s.preferred = Family::V4;
                } else {
                    s.preferred = Family::V6;
                }
                if (b.provider && std::string_view(b.provider) == "aurora-vpn" &&
                    b.planted == SessionCategory::DualSafe && b.v6 == fd::V6Space::ExitPool &&
                    i < fd::kDuplicatesPerDay)
                    dup_bases.push_back(s);
                rows.push_back(std::move(s));
            }
        }
    }
    for (const Session& base : dup_bases) {
        Session dup = base;
        dup.timestamp += 60; // same address pair, same UTC hour
        dup.session_id = base.session_id + "d";
        rows.push_back(std::move(dup));
    }

    FixtureFiles files;
    files.sessions = path("sessions.csv");
    {
        std::ofstream out(files.sessions);
        out << "timestamp,session_id,v4,v6,preferred\n";
        for (const Session& s : rows) out << session_to_csv_row(s) << '\n';
    }

    // --- directories ---
    files.vpn = path("vpn_prefixes.csv");
    {
        std::ofstream out(files.vpn);
        out << "prefix,provider\n"
            << "101.10.0.0/16,aurora-vpn\n"
            << "102.10.0.0/16,borealis-vpn\n"
            << "103.10.0.0/16,cascade-vpn\n"
            << "104.10.0.0/16,drift-vpn\n"
            << "105.10.0.0/16,ember-vpn\n"
            << "106.10.0.0/16,fjord-vpn\n"
            << "107.10.0.0/16,glacier-vpn\n"
            << "107.20.0.0/16,glacier-vpn\n"
            << "108.10.0.0/16,harbor-vpn\n"
            << "2001:4000::/32,exit-wholesale\n";
    }

    files.as_prefixes = path("as_prefixes.csv");
    {
        std::ofstream out(files.as_prefixes);
        out << "prefix,asn\n"
            << "101.10.0.0/16,64601\n"
            << "102.10.0.0/16,64602\n"
            << "103.10.0.0/16,64603\n"
            << "104.10.0.0/16,64604\n"
            << "105.10.0.0/16,64605\n"
            << "106.10.0.0/16,64606\n"
            << "107.10.0.0/16,64607\n"
            << "107.20.0.0/16,64617\n"
            << "108.10.0.0/16,64608\n"
            << "91.200.0.0/16,65200\n"
            << "91.201.0.0/16,65200\n"
            << "2001:4000::/32,64700\n"
            << "2001:1000::/32,65001\n"
            << "2001:1100::/32,65002\n"
            << "2001:1200::/32,65003\n"
            << "2001:3700::/32,64617\n"
            << "2001:5000::/32,65100\n";
    }

    files.orgs = path("as_orgs.csv");
    {
        std::ofstream out(files.orgs);
        out << "asn,org_id\n"
            << "64601,org-aurora\n"
            << "64602,org-borealis\n"
            << "64603,org-cascade\n"
            << "64604,org-drift\n"
            << "64605,org-ember\n"
            << "64606,org-fjord\n"
            << "64607,org-glacier-a\n"
            << "64617,org-glacier-b\n"
            << "64608,org-harbor\n"
            << "64700,org-exit-wholesale\n"
            << "65001,org-isp-1\n"
            << "65002,org-isp-2\n"
            << "65003,org-isp-3\n"
            << "65100,org-prefetch-isp\n"
            << "65200,org-eyeball\n";
    }

    files.categories = path("as_categories.csv");
    {
        std::ofstream out(files.categories);
        out << "asn,category\n"
            << "64601,VPN\n"
            << "64602,VPN\n"
            << "64603,VPN\n"
            << "64604,VPN\n"
            << "64605,VPN\n"
            << "64606,VPN\n"
            << "64607,VPN\n"
            << "64617,VPN\n"
            << "64608,VPN\n"
            << "64700,Hosting\n"
            << "65001,ISP\n"
            << "65002,ISP\n"
            << "65003,ISP\n"
            << "65100,ISP\n"
            << "65200,ISP\n";
    }

    files.prefetch = path("prefetch_prefixes.txt");
    {
        std::ofstream out(files.prefetch);
        out << "# browser prefetch ranges\n"
            << "2001:5000::/32\n";
    }

    // --- manifest ---
    struct Tally {
        std::uint64_t v4_only = 0, dual_safe = 0, prefetch = 0, partial = 0, leak = 0;
        std::uint64_t pref_v4 = 0, unknown_as = 0;
    };
    std::map<std::string, Tally> with_pf, without_pf;
    std::uint64_t non_vpn = 0;
    for (const fd::Block& b : fd::blocks()) {
        std::uint64_t n = static_cast<std::uint64_t>(b.per_day) * spec.days;
        std::uint64_t pref = static_cast<std::uint64_t>(b.pref_v4) * spec.days;
        if (!b.provider) {
            non_vpn += n;
            continue;
        }
        Tally& w = with_pf[b.provider];
        Tally& wo = without_pf[b.provider];
        switch (b.planted) {
        case SessionCategory::V4OnlyVpn:
            w.v4_only += n;
            wo.v4_only += n;
            break;
        case SessionCategory::DualSafe:
            w.dual_safe += n;
            wo.dual_safe += n;
            w.pref_v4 += pref;
            wo.pref_v4 += pref;
            if (b.v6 == fd::V6Space::Unmapped) {
                w.unknown_as += n;
                wo.unknown_as += n;
            }
            break;
        case SessionCategory::DualSafePrefetch:
            // Without the prefetch list these sessions satisfy all three
            // leak criteria.
            w.prefetch += n;
            w.pref_v4 += pref;
            wo.leak += n;
            break;
        case SessionCategory::DualSafePartialDeployment:
            w.partial += n;
            wo.partial += n;
            w.pref_v4 += pref;
            wo.pref_v4 += pref;
            break;
        case SessionCategory::Leak:
            w.leak += n;
            wo.leak += n;
            break;
        case SessionCategory::NonVpn: break;
        }
    }

    nlohmann::ordered_json manifest;
    manifest["days"] = spec.days;
    manifest["seed"] = spec.seed;
    manifest["raw_rows"] = rows.size();
    manifest["unique_sessions"] = rows.size() - dup_bases.size();
    manifest["duplicate_rows"] = dup_bases.size();
    manifest["non_vpn_sessions"] = non_vpn;
    manifest["thresholds"] = {{"min_mean_sessions_per_day", 100.0},
                              {"min_dual_safe_per_day", 20.0}};

    std::uint64_t weighted_num = 0, weighted_den = 0;
    nlohmann::ordered_json providers;
    nlohmann::ordered_json omitted = nlohmann::ordered_json::array();
    for (const auto& [provider, w] : with_pf) {
        const Tally& wo = without_pf[provider];
        std::uint64_t total = w.v4_only + w.dual_safe + w.prefetch + w.partial + w.leak;
        std::uint64_t safe = w.dual_safe + w.prefetch + w.partial;
        std::uint64_t dual = safe + w.leak;
        double mean = static_cast<double>(total) / spec.days;
        bool undersampled = !(mean > 100.0);
        bool depref_defined = static_cast<double>(safe) / spec.days >= 20.0;
        nlohmann::ordered_json p;
        p["sessions"] = total;
        p["mean_sessions_per_day"] = mean;
        auto tally_json = [](const Tally& t) {
            nlohmann::ordered_json j;
            j["v4_only"] = t.v4_only;
            j["dual_safe"] = t.dual_safe;
            j["dual_safe_prefetch"] = t.prefetch;
            j["dual_safe_partial"] = t.partial;
            j["leak"] = t.leak;
            j["dual_pref_v4"] = t.pref_v4;
            j["unknown_as"] = t.unknown_as;
            return j;
        };
        p["with_prefetch"] = tally_json(w);
        p["without_prefetch"] = tally_json(wo);
        p["leak_rate_all"] = total ? static_cast<double>(w.leak) / total : 0.0;
        p["leak_rate_dual"] = dual ? static_cast<double>(w.leak) / dual : 0.0;
        if (depref_defined)
            p["depref_rate"] = static_cast<double>(w.pref_v4) / safe;
        else
            p["depref_rate"] = nullptr;
        p["undersampled"] = undersampled;
        providers[provider] = std::move(p);
        if (!undersampled && depref_defined) {
            weighted_num += w.pref_v4;
            weighted_den += safe;
        }
        if (!undersampled && !depref_defined) omitted.push_back(provider);
    }
    manifest["providers"] = std::move(providers);
    nlohmann::ordered_json depref;
    if (weighted_den)
        depref["weighted_mean"] = static_cast<double>(weighted_num) / weighted_den;
    else
        depref["weighted_mean"] = nullptr;
    depref["dual_safe_sessions"] = weighted_den;
    depref["dual_pref_v4_sessions"] = weighted_num;
    depref["omitted"] = std::move(omitted);
    manifest["depreference"] = std::move(depref);

    files.manifest = path("manifest.json");
    {
        std::ofstream out(files.manifest);
        out << manifest.dump(2) << '\n';
    }

    if (files_out) *files_out = files;
    return manifest;
}

} // namespace dualstack
