#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dualstack/error.hpp"
#include "dualstack/policy.hpp"
#include "dualstack/race.hpp"
#include "dualstack/selection.hpp"

namespace dualstack {

// A self-contained race setup: host addresses, destinations, a latency
// model, and which policy table to select with.
struct Scenario {
    enum class PolicyKind { Default, Tla, File };

    std::string name;
    PolicyKind policy_kind = PolicyKind::Default;
    std::string policy_file;
    std::vector<SourceCandidate> sources;
    std::vector<IpAddress> destinations;
    NetworkModel network;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    RaceConfig race;
};

inline PolicyTable scenario_policy(const Scenario& s) {
    switch (s.policy_kind) {
    case Scenario::PolicyKind::Default: return default_policy();
    case Scenario::PolicyKind::Tla: return tla_policy();
    case Scenario::PolicyKind::File: return load_policy_file(s.policy_file);
    }
    throw std::logic_error("bad policy kind");
}

// Accepts "default", "tla", or "file:PATH"; relative paths resolve against
// base_dir when given.
inline void set_policy_choice(Scenario& s, std::string_view choice, const std::string& base_dir) {
    if (choice == "default") {
        s.policy_kind = Scenario::PolicyKind::Default;
    } else if (choice == "tla") {
        s.policy_kind = Scenario::PolicyKind::Tla;
    } else if (choice.substr(0, 5) == "file:") {
        s.policy_kind = Scenario::PolicyKind::File;
        std::filesystem::path p{std::string(choice.substr(5))};
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        s.policy_file = p.string();
    } else {
        throw ConfigError("bad policy choice '" + std::string(choice) +
                          "' (want default, tla, or file:PATH)");
    }
}

namespace detail {

inline LatencySpec parse_latency_tokens(const std::vector<std::string>& tokens,
                                        const std::string& where) {
    if (tokens.empty())
        throw ParseError(where + ": missing distribution");
    std::size_t want = 0;
    LatencySpec::Kind kind;
    if (tokens[0] == "constant") {
        kind = LatencySpec::Kind::Constant;
        want = 1;
    } else if (tokens[0] == "uniform") {
        kind = LatencySpec::Kind::Uniform;
        want = 2;
    } else if (tokens[0] == "exponential") {
        kind = LatencySpec::Kind::Exponential;
        want = 1;
    } else if (tokens[0] == "normal") {
        kind = LatencySpec::Kind::Normal;
        want = 2;
    } else {
        throw ParseError(where + ": unknown distribution '" + tokens[0] + "'");
    }
    bool fails = tokens.size() == want + 2 && tokens.back() == "fail";
    if (tokens.size() != want + 1 && !fails)
        throw ParseError(where + ": '" + tokens[0] + "' takes " + std::to_string(want) +
                         " parameter(s) plus optional 'fail'");
    auto num = [&](const std::string& text) {
        try {
            std::size_t used = 0;
            double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw ParseError(where + ": bad number '" + text + "'");
        }
    };
    LatencySpec spec;
    spec.kind = kind;
    spec.fails = fails;
    spec.a = num(tokens[1]);
    if (want == 2) spec.b = num(tokens[2]);
    if (spec.a < 0 || spec.b < 0)
        throw ParseError(where + ": negative latency parameter");
    if (kind == LatencySpec::Kind::Uniform && spec.b < spec.a)
        throw ParseError(where + ": uniform bounds out of order");
    return spec;
}

} // namespace detail

// Line-oriented scenario text: top-level "key value" lines followed by
// [sources], [destinations], and [network] sections. '#' starts a comment.
inline Scenario parse_scenario(std::istream& in, std::string_view source_name,
                               const std::string& base_dir = "") {
    Scenario s;
    std::string line;
    int lineno = 0;
    enum class Section { Top, Sources, Destinations, Network } section = Section::Top;

    auto fail = [&](const std::string& what) -> void {
        throw ParseError(std::string(source_name) + ":" + std::to_string(lineno) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (std::size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string tok; fields >> tok;) tokens.push_back(tok);
        if (tokens.empty()) continue;

        if (tokens[0] == "[sources]" || tokens[0] == "[destinations]" ||
            tokens[0] == "[network]") {
            if (tokens.size() != 1) fail("trailing tokens after section header");
            section = tokens[0] == "[sources]"      ? Section::Sources
                      : tokens[0] == "[destinations]" ? Section::Destinations
                                                      : Section::Network;
            continue;
        }

        std::string where = std::string(source_name) + ":" + std::to_string(lineno);
        try {
            switch (section) {
            case Section::Top: {
                if (tokens.size() < 2) fail("expected 'key value'");
                const std::string& key = tokens[0];
                const std::string& value = tokens[1];
                if (tokens.size() > 2) fail("trailing tokens after '" + key + "'");
                if (key == "name") {
                    s.name = value;
                } else if (key == "policy") {
                    set_policy_choice(s, value, base_dir);
                } else if (key == "seed") {
                    s.seed = std::stoull(value);
                } else if (key == "trials") {
                    long long n = std::stoll(value);
                    if (n < 1) fail("trials must be at least 1");
                    s.trials = static_cast<std::size_t>(n);
                } else if (key == "delay_ms") {
                    double ms = std::stod(value);
                    if (ms <= 0) fail("delay_ms must be positive");
                    s.race.attempt_delay_us = std::llround(ms * 1000.0);
                } else if (key == "max_attempts") {
                    long long n = std::stoll(value);
                    if (n < 1) fail("max_attempts must be at least 1");
                    s.race.max_attempts = static_cast<std::size_t>(n);
                } else {
                    fail("unknown key '" + key + "'");
                }
                break;
            }
            case Section::Sources: {
                SourceCandidate cand;
                cand.addr = IpAddress::parse(tokens[0]);
                for (std::size_t i = 1; i < tokens.size(); ++i) {
                    if (tokens[i] == "deprecated") {
                        cand.deprecated = true;
                    } else if (auto cls = address_class_from_string(tokens[i])) {
                        AddressClass actual = classify(cand.addr);
                        if (actual != *cls)
                            fail("[sources] " + tokens[0] + " is " +
                                 std::string(to_string(actual)) + ", not " + tokens[i]);
                    } else {
                        fail("[sources] unknown annotation '" + tokens[i] + "'");
                    }
                }
                s.sources.push_back(cand);
                break;
            }
            case Section::Destinations: {
                if (tokens.size() != 1) fail("[destinations] expected one address per line");
                s.destinations.push_back(IpAddress::parse(tokens[0]));
                break;
            }
            case Section::Network: {
                IpAddress dest = IpAddress::parse(tokens[0]);
                s.network.set(dest, detail::parse_latency_tokens(
                                        {tokens.begin() + 1, tokens.end()}, where + " [network]"));
                break;
            }
            }
        } catch (const std::exception& e) {
            if (std::string_view(e.what()).starts_with(where)) throw;
            fail(e.what());
        }
    }

    if (s.sources.empty())
        throw ConfigError(std::string(source_name) + ": no [sources] section");
    if (s.destinations.empty())
        throw ConfigError(std::string(source_name) + ": no [destinations] section");
    return s;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario '" + path + "'");
    Scenario s = parse_scenario(in, path, std::filesystem::path(path).parent_path().string());
    if (s.name.empty()) s.name = std::filesystem::path(path).stem().string();
    return s;
}

enum class Verdict { PrefersV4, PrefersV6, Mixed };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::PrefersV4: return "prefers_v4";
    case Verdict::PrefersV6: return "prefers_v6";
    case Verdict::Mixed: return "mixed";
    }
    return "?";
}

struct ScenarioResult {
    SortResult sorted;
    std::optional<RaceOutcome> race; // present for single-trial runs
    MonteCarloResult fractions;
    Verdict verdict = Verdict::Mixed;
};

inline ScenarioResult run_scenario(const Scenario& s) {
    PolicyTable policy = scenario_policy(s);
    ScenarioResult result;
    result.sorted = sort_destinations(s.destinations, s.sources, policy);

    // Check all raced destinations up front; a race may stop early and
    // never touch a late entry.
    for (const CandidatePair& pair : result.sorted.pairs)
        if (!s.network.find(pair.dest))
            throw ConfigError(s.name + ": no network entry for destination " + pair.dest.str());

    if (result.sorted.pairs.empty()) {
        result.fractions.trials = s.trials;
        result.fractions.failure_count = s.trials;
        return result;
    }

    if (s.trials == 1) {
        RaceOutcome outcome = run_race(result.sorted.pairs, s.network, s.race, s.seed);
        result.fractions.trials = 1;
        if (!outcome.winner_family)
            result.fractions.failure_count = 1;
        else if (*outcome.winner_family == Family::V4)
            result.fractions.v4_win_count = 1;
        else
            result.fractions.v6_win_count = 1;
        result.race = std::move(outcome);
    } else {
        result.fractions =
            run_monte_carlo(result.sorted.pairs, s.network, s.race, s.trials, s.seed);
    }

    if (result.fractions.v4_win_count > result.fractions.v6_win_count)
        result.verdict = Verdict::PrefersV4;
    else if (result.fractions.v6_win_count > result.fractions.v4_win_count)
        result.verdict = Verdict::PrefersV6;
    return result;
}

} // namespace dualstack
