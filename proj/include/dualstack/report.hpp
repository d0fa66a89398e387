#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualstack/sessions.hpp"

namespace dualstack {

struct ProviderCounts {
    std::uint64_t v4_only = 0;
    std::uint64_t dual_safe = 0;
    std::uint64_t dual_safe_prefetch = 0;
    std::uint64_t dual_safe_partial = 0;
    std::uint64_t leak = 0;
    std::uint64_t dual_pref_v4 = 0; // safe dual-stack sessions that still preferred v4
    std::uint64_t unknown_as = 0;

    std::uint64_t total() const {
        return v4_only + dual_safe + dual_safe_prefetch + dual_safe_partial + leak;
    }
    // Denominator for the dual-stack leak rate: every session where both
    // families were observed.
    std::uint64_t dual_total() const {
        return dual_safe + dual_safe_prefetch + dual_safe_partial + leak;
    }
    // Denominator for the de-preference rate: dual-stack sessions that
    // stayed safe.
    std::uint64_t dual_safe_total() const {
        return dual_safe + dual_safe_prefetch + dual_safe_partial;
    }

    void merge(const ProviderCounts& o) {
        v4_only += o.v4_only;
        dual_safe += o.dual_safe;
        dual_safe_prefetch += o.dual_safe_prefetch;
        dual_safe_partial += o.dual_safe_partial;
        leak += o.leak;
        dual_pref_v4 += o.dual_pref_v4;
        unknown_as += o.unknown_as;
    }

    friend bool operator==(const ProviderCounts&, const ProviderCounts&) = default;
};

// Streaming tally of classified sessions. merge() is associative and
// commutative, so any partition of a log aggregates to the same totals.
class Accumulator {
public:
    void add(const Session& s, const Classification& c) {
        min_ts_ = std::min(min_ts_, s.timestamp);
        max_ts_ = std::max(max_ts_, s.timestamp);
        if (c.category == SessionCategory::NonVpn) {
            ++non_vpn_;
            return;
        }
        ProviderCounts& counts = providers_[c.provider];
        switch (c.category) {
        case SessionCategory::V4OnlyVpn: ++counts.v4_only; break;
        case SessionCategory::DualSafe: ++counts.dual_safe; break;
        case SessionCategory::DualSafePrefetch: ++counts.dual_safe_prefetch; break;
        case SessionCategory::DualSafePartialDeployment: ++counts.dual_safe_partial; break;
        case SessionCategory::Leak: ++counts.leak; break;
        case SessionCategory::NonVpn: break;
        }
        if (c.category != SessionCategory::Leak && c.category != SessionCategory::V4OnlyVpn &&
            s.preferred == Family::V4)
            ++counts.dual_pref_v4;
        if (c.unknown_as) ++counts.unknown_as;
    }

    void merge(const Accumulator& o) {
        for (const auto& [provider, counts] : o.providers_) providers_[provider].merge(counts);
        non_vpn_ += o.non_vpn_;
        min_ts_ = std::min(min_ts_, o.min_ts_);
        max_ts_ = std::max(max_ts_, o.max_ts_);
    }

    const std::map<std::string, ProviderCounts>& providers() const { return providers_; }
    std::uint64_t non_vpn() const { return non_vpn_; }

    // Inclusive UTC-day span covered by the whole log, 0 when empty.
    int days() const {
        if (min_ts_ > max_ts_) return 0;
        return static_cast<int>(max_ts_ / 86400 - min_ts_ / 86400) + 1;
    }

    friend bool operator==(const Accumulator&, const Accumulator&) = default;

private:
    std::map<std::string, ProviderCounts> providers_;
    std::uint64_t non_vpn_ = 0;
    std::int64_t min_ts_ = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_ts_ = std::numeric_limits<std::int64_t>::min();
};

struct ProviderReport {
    std::string provider;
    int days = 0;
    double mean_sessions_per_day = 0.0;
    ProviderCounts counts;
    double leak_rate_all = 0.0;  // leaks over every session of the provider
    double leak_rate_dual = 0.0; // leaks over dual-stack sessions, 0 when none
    std::optional<double> depref_rate; // unset below the dual-safe threshold
    bool undersampled = false;

    friend bool operator==(const ProviderReport&, const ProviderReport&) = default;
};

struct DepreferenceSummary {
    // Traffic-weighted mean over providers meeting both thresholds.
    std::optional<double> weighted_mean;
    std::uint64_t dual_safe_sessions = 0;
    std::uint64_t dual_pref_v4_sessions = 0;
    std::vector<std::string> omitted; // reported providers below the dual-safe threshold

    friend bool operator==(const DepreferenceSummary&, const DepreferenceSummary&) = default;
};

struct AggregateOptions {
    double min_mean_sessions_per_day = 100.0; // strict: mean must exceed this
    double min_dual_safe_per_day = 20.0;      // inclusive: mean may equal this
};

struct AggregateResult {
    std::vector<ProviderReport> providers;    // qualifying, sorted by name
    std::vector<ProviderReport> undersampled; // below the session threshold, sorted by name
    DepreferenceSummary depreference;
    std::uint64_t non_vpn_sessions = 0;
    int days = 0;

    friend bool operator==(const AggregateResult&, const AggregateResult&) = default;
};

inline AggregateResult aggregate(const Accumulator& acc, const AggregateOptions& opt = {}) {
    AggregateResult result;
    result.non_vpn_sessions = acc.non_vpn();
    result.days = acc.days();
    int days = std::max(result.days, 1);
    for (const auto& [provider, counts] : acc.providers()) {
        ProviderReport report;
        report.provider = provider;
        report.days = result.days;
        report.counts = counts;
        report.mean_sessions_per_day = static_cast<double>(counts.total()) / days;
        report.leak_rate_all =
            counts.total() ? static_cast<double>(counts.leak) / counts.total() : 0.0;
        report.leak_rate_dual =
            counts.dual_total() ? static_cast<double>(counts.leak) / counts.dual_total() : 0.0;
        double dual_safe_per_day = static_cast<double>(counts.dual_safe_total()) / days;
        if (dual_safe_per_day >= opt.min_dual_safe_per_day)
            report.depref_rate =
                static_cast<double>(counts.dual_pref_v4) / counts.dual_safe_total();
        report.undersampled = !(report.mean_sessions_per_day > opt.min_mean_sessions_per_day);
        if (report.undersampled) {
            result.undersampled.push_back(std::move(report));
        } else {
            if (!report.depref_rate) result.depreference.omitted.push_back(provider);
            result.providers.push_back(std::move(report));
        }
    }
    for (const ProviderReport& report : result.providers) {
        if (!report.depref_rate) continue;
        result.depreference.dual_safe_sessions += report.counts.dual_safe_total();
        result.depreference.dual_pref_v4_sessions += report.counts.dual_pref_v4;
    }
    if (result.depreference.dual_safe_sessions)
        result.depreference.weighted_mean =
            static_cast<double>(result.depreference.dual_pref_v4_sessions) /
            result.depreference.dual_safe_sessions;
    return result;
}

// Per-provider de-preference rates for providers meeting both thresholds,
// plus the traffic-weighted mean.
inline std::vector<std::pair<std::string, double>> depreference_rates(const AggregateResult& r) {
    std::vector<std::pair<std::string, double>> rates;
    for (const ProviderReport& report : r.providers)
        if (report.depref_rate) rates.push_back({report.provider, *report.depref_rate});
    return rates;
}

} // namespace dualstack
