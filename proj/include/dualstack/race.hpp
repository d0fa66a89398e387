#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dualstack/error.hpp"
#include "dualstack/ip.hpp"
#include "dualstack/selection.hpp"

namespace dualstack {

// Latency model for one destination. Parameters are in milliseconds.
struct LatencySpec {
    enum class Kind { Constant, Uniform, Exponential, Normal };

    Kind kind = Kind::Constant;
    double a = 0.0; // constant: value, uniform: lo, exponential: mean, normal: mean
    double b = 0.0; // uniform: hi, normal: stddev
    bool fails = false;

    static LatencySpec constant(double ms, bool fails = false) {
        return {Kind::Constant, ms, 0.0, fails};
    }
    static LatencySpec uniform(double lo_ms, double hi_ms, bool fails = false) {
        return {Kind::Uniform, lo_ms, hi_ms, fails};
    }
    static LatencySpec exponential(double mean_ms, bool fails = false) {
        return {Kind::Exponential, mean_ms, 0.0, fails};
    }
    static LatencySpec normal(double mean_ms, double stddev_ms, bool fails = false) {
        return {Kind::Normal, mean_ms, stddev_ms, fails};
    }

    bool random() const { return kind != Kind::Constant; }
};

class NetworkModel {
public:
    void set(const IpAddress& dest, LatencySpec spec) { entries_[dest.bits()] = spec; }

    const LatencySpec* find(const IpAddress& dest) const {
        auto it = entries_.find(dest.bits());
        return it == entries_.end() ? nullptr : &it->second;
    }

    bool any_random() const {
        for (const auto& [addr, spec] : entries_)
            if (spec.random()) return true;
        return false;
    }

private:
    std::map<IpBits, LatencySpec> entries_;
};

// Deterministic latency sampler. All draws go through one fixed-width
// uniform so results are identical across platforms; constant specs
// consume no randomness.
class LatencySampler {
public:
    explicit LatencySampler(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::int64_t sample_us(const LatencySpec& spec) {
        double ms = 0.0;
        switch (spec.kind) {
        case LatencySpec::Kind::Constant: ms = spec.a; break;
        case LatencySpec::Kind::Uniform: ms = spec.a + uniform01() * (spec.b - spec.a); break;
        case LatencySpec::Kind::Exponential: ms = -spec.a * std::log1p(-uniform01()); break;
        case LatencySpec::Kind::Normal: {
            double u1 = std::max(uniform01(), 0x1.0p-53);
            double u2 = uniform01();
            ms = spec.a +
                 spec.b * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
            break;
        }
        }
        if (!(ms > 0.0)) ms = 0.0;
        return std::llround(ms * 1000.0);
    }

private:
    std::mt19937_64 engine_;
};

struct RaceConfig {
    std::int64_t attempt_delay_us = 250'000;
    std::size_t max_attempts = std::numeric_limits<std::size_t>::max();
};

struct RaceEvent {
    enum class Kind { AttemptStarted, Connected, Failed };

    std::int64_t time_us = 0;
    Kind kind = Kind::AttemptStarted;
    std::size_t candidate = 0;

    friend constexpr bool operator==(const RaceEvent&, const RaceEvent&) = default;
};

inline std::string_view to_string(RaceEvent::Kind k) {
    switch (k) {
    case RaceEvent::Kind::AttemptStarted: return "attempt-started";
    case RaceEvent::Kind::Connected: return "connected";
    case RaceEvent::Kind::Failed: return "failed";
    }
    return "?";
}

struct RaceOutcome {
    std::optional<std::size_t> winner;        // index into the raced list
    std::optional<Family> winner_family;
    std::int64_t winner_time_us = -1;
    std::vector<RaceEvent> timeline;          // times non-decreasing

    friend bool operator==(const RaceOutcome&, const RaceOutcome&) = default;
};

// Staggered connection race over an ordered candidate list (RFC 8305
// model): attempt k may start at k * attempt_delay_us unless some earlier
// attempt has already connected by then. The winner is the earliest
// connect; ties go to the earlier list position. Failures never win and
// never accelerate later attempts.
inline RaceOutcome run_race_with(std::span<const CandidatePair> candidates,
                                 const NetworkModel& net, const RaceConfig& cfg,
                                 LatencySampler& sampler) {
    if (candidates.empty())
        throw ConfigError("race requires at least one candidate");
    if (cfg.attempt_delay_us <= 0)
        throw ConfigError("attempt delay must be positive");

    RaceOutcome out;
    std::int64_t winner_time = std::numeric_limits<std::int64_t>::max();
    std::size_t attempts = std::min(candidates.size(), cfg.max_attempts);
    for (std::size_t k = 0; k < attempts; ++k) {
        std::int64_t start = static_cast<std::int64_t>(k) * cfg.attempt_delay_us;
        if (winner_time <= start) break;
        const LatencySpec* spec = net.find(candidates[k].dest);
        if (!spec)
            throw ConfigError("no network entry for destination " + candidates[k].dest.str());
        out.timeline.push_back({start, RaceEvent::Kind::AttemptStarted, k});
        std::int64_t done = start + sampler.sample_us(*spec);
        if (spec->fails) {
            out.timeline.push_back({done, RaceEvent::Kind::Failed, k});
            continue;
        }
        out.timeline.push_back({done, RaceEvent::Kind::Connected, k});
        if (done < winner_time) {
            winner_time = done;
            out.winner = k;
        }
    }
    if (out.winner) {
        out.winner_time_us = winner_time;
        out.winner_family = candidates[*out.winner].family();
    }
    std::stable_sort(out.timeline.begin(), out.timeline.end(),
                     [](const RaceEvent& a, const RaceEvent& b) { return a.time_us < b.time_us; });
    return out;
}

inline RaceOutcome run_race(std::span<const CandidatePair> candidates, const NetworkModel& net,
                            const RaceConfig& cfg = {}, std::uint64_t seed = 0) {
    LatencySampler sampler(seed);
    return run_race_with(candidates, net, cfg, sampler);
}

struct MonteCarloResult {
    std::size_t trials = 0;
    std::size_t v4_win_count = 0;
    std::size_t v6_win_count = 0;
    std::size_t failure_count = 0;

    double v4_wins() const { return trials ? static_cast<double>(v4_win_count) / trials : 0.0; }
    double v6_wins() const { return trials ? static_cast<double>(v6_win_count) / trials : 0.0; }
    double failures() const { return trials ? static_cast<double>(failure_count) / trials : 0.0; }

    friend constexpr bool operator==(const MonteCarloResult&, const MonteCarloResult&) = default;
};

// Repeated races over one seeded sampler; the trial sequence is a pure
// function of (inputs, seed).
inline MonteCarloResult run_monte_carlo(std::span<const CandidatePair> candidates,
                                        const NetworkModel& net, const RaceConfig& cfg,
                                        std::size_t trials, std::uint64_t seed) {
    if (trials == 0)
        throw ConfigError("monte carlo requires at least one trial");
    LatencySampler sampler(seed);
    MonteCarloResult result;
    result.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        RaceOutcome outcome = run_race_with(candidates, net, cfg, sampler);
        if (!outcome.winner_family) {
            ++result.failure_count;
        } else if (*outcome.winner_family == Family::V4) {
            ++result.v4_win_count;
        } else {
            ++result.v6_win_count;
        }
    }
    return result;
}

} // namespace dualstack
