#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualstack/csv.hpp"
#include "dualstack/report.hpp"

namespace dualstack {

namespace detail {

inline std::vector<const ProviderReport*> report_rows(const AggregateResult& r,
                                                      bool include_undersampled) {
    std::vector<const ProviderReport*> rows;
    for (const ProviderReport& p : r.providers) rows.push_back(&p);
    if (include_undersampled)
        for (const ProviderReport& p : r.undersampled) rows.push_back(&p);
    std::sort(rows.begin(), rows.end(), [](const ProviderReport* a, const ProviderReport* b) {
        return a->provider < b->provider;
    });
    return rows;
}

// Figure ordering: worst leak rate first, name breaks ties.
inline std::vector<const ProviderReport*> plot_rows(const AggregateResult& r) {
    std::vector<const ProviderReport*> rows;
    for (const ProviderReport& p : r.providers) rows.push_back(&p);
    std::sort(rows.begin(), rows.end(), [](const ProviderReport* a, const ProviderReport* b) {
        if (a->leak_rate_all != b->leak_rate_all) return a->leak_rate_all > b->leak_rate_all;
        return a->provider < b->provider;
    });
    return rows;
}

} // namespace detail

inline constexpr std::string_view kReportCsvHeader =
    "provider,days,mean_sessions_per_day,total_sessions,v4_only,dual_safe,dual_safe_prefetch,"
    "dual_safe_partial,leak,unknown_as,leak_rate_all,leak_rate_dual,depref_rate,undersampled";

inline std::string report_to_csv(const AggregateResult& r, bool include_undersampled = false) {
    std::string out{kReportCsvHeader};
    out += '\n';
    for (const ProviderReport* p : detail::report_rows(r, include_undersampled)) {
        const ProviderCounts& c = p->counts;
        out += p->provider;
        out += ',' + std::to_string(p->days);
        out += ',' + fmt_double(p->mean_sessions_per_day);
        out += ',' + std::to_string(c.total());
        out += ',' + std::to_string(c.v4_only);
        out += ',' + std::to_string(c.dual_safe);
        out += ',' + std::to_string(c.dual_safe_prefetch);
        out += ',' + std::to_string(c.dual_safe_partial);
        out += ',' + std::to_string(c.leak);
        out += ',' + std::to_string(c.unknown_as);
        out += ',' + fmt_double(p->leak_rate_all);
        out += ',' + fmt_double(p->leak_rate_dual);
        out += ',';
        if (p->depref_rate) out += fmt_double(*p->depref_rate);
        out += ',';
        out += p->undersampled ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline nlohmann::ordered_json report_to_json(const AggregateResult& r,
                                             bool include_undersampled = false) {
    nlohmann::ordered_json doc;
    doc["days"] = r.days;
    doc["non_vpn_sessions"] = r.non_vpn_sessions;
    doc["providers"] = nlohmann::ordered_json::array();
    for (const ProviderReport* p : detail::report_rows(r, include_undersampled)) {
        const ProviderCounts& c = p->counts;
        nlohmann::ordered_json row;
        row["provider"] = p->provider;
        row["days"] = p->days;
        row["mean_sessions_per_day"] = p->mean_sessions_per_day;
        row["total_sessions"] = c.total();
        row["v4_only"] = c.v4_only;
        row["dual_safe"] = c.dual_safe;
        row["dual_safe_prefetch"] = c.dual_safe_prefetch;
        row["dual_safe_partial"] = c.dual_safe_partial;
        row["leak"] = c.leak;
        row["unknown_as"] = c.unknown_as;
        row["leak_rate_all"] = p->leak_rate_all;
        row["leak_rate_dual"] = p->leak_rate_dual;
        if (p->depref_rate)
            row["depref_rate"] = *p->depref_rate;
        else
            row["depref_rate"] = nullptr;
        row["undersampled"] = p->undersampled;
        doc["providers"].push_back(std::move(row));
    }
    nlohmann::ordered_json depref;
    if (r.depreference.weighted_mean)
        depref["weighted_mean"] = *r.depreference.weighted_mean;
    else
        depref["weighted_mean"] = nullptr;
    depref["dual_safe_sessions"] = r.depreference.dual_safe_sessions;
    depref["dual_pref_v4_sessions"] = r.depreference.dual_pref_v4_sessions;
    depref["omitted"] = r.depreference.omitted;
    doc["depreference"] = std::move(depref);
    nlohmann::ordered_json undersampled = nlohmann::ordered_json::array();
    for (const ProviderReport& p : r.undersampled) undersampled.push_back(p.provider);
    doc["undersampled_providers"] = std::move(undersampled);
    return doc;
}

// Per-figure flat files, ready for plotting.

inline std::string plot_sessions_per_day_csv(const AggregateResult& r) {
    std::string out = "provider,mean_sessions_per_day\n";
    for (const ProviderReport* p : detail::plot_rows(r))
        out += p->provider + ',' + fmt_double(p->mean_sessions_per_day) + '\n';
    return out;
}

inline std::string plot_category_distribution_csv(const AggregateResult& r) {
    std::string out = "provider,v4_only,dual_safe,dual_safe_prefetch,dual_safe_partial,leak\n";
    for (const ProviderReport* p : detail::plot_rows(r)) {
        const ProviderCounts& c = p->counts;
        double total = static_cast<double>(c.total());
        auto frac = [&](std::uint64_t n) { return total > 0 ? n / total : 0.0; };
        out += p->provider;
        out += ',' + fmt_double(frac(c.v4_only));
        out += ',' + fmt_double(frac(c.dual_safe));
        out += ',' + fmt_double(frac(c.dual_safe_prefetch));
        out += ',' + fmt_double(frac(c.dual_safe_partial));
        out += ',' + fmt_double(frac(c.leak));
        out += '\n';
    }
    return out;
}

inline std::string plot_leak_rates_csv(const AggregateResult& r) {
    std::string out = "provider,leak_rate_all,leak_rate_dual\n";
    for (const ProviderReport* p : detail::plot_rows(r))
        out += p->provider + ',' + fmt_double(p->leak_rate_all) + ',' +
               fmt_double(p->leak_rate_dual) + '\n';
    return out;
}

inline std::string plot_depreference_csv(const AggregateResult& r) {
    std::vector<const ProviderReport*> rows;
    for (const ProviderReport& p : r.providers)
        if (p.depref_rate) rows.push_back(&p);
    std::sort(rows.begin(), rows.end(), [](const ProviderReport* a, const ProviderReport* b) {
        if (*a->depref_rate != *b->depref_rate) return *a->depref_rate > *b->depref_rate;
        return a->provider < b->provider;
    });
    std::string out = "provider,depref_rate,dual_safe_sessions\n";
    for (const ProviderReport* p : rows)
        out += p->provider + ',' + fmt_double(*p->depref_rate) + ',' +
               std::to_string(p->counts.dual_safe_total()) + '\n';
    return out;
}

} // namespace dualstack
