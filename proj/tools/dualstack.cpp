// Command-line front end: address ranking, connection races, scenario
// files, session-log classification, fixtures, and a self test.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualstack/dualstack.hpp"

namespace ds = dualstack;
using nlohmann::ordered_json;

namespace {

struct GlobalOpts {
    std::string policy = "default";
    std::uint64_t seed = 0;
    bool json = false;
    bool strict = false;
};

ds::PolicyTable resolve_policy(const std::string& choice) {
    ds::Scenario probe;
    ds::set_policy_choice(probe, choice, "");
    return ds::scenario_policy(probe);
}

std::vector<ds::SourceCandidate> make_sources(const std::vector<std::string>& src,
                                              const std::vector<std::string>& deprecated) {
    std::vector<ds::SourceCandidate> sources;
    for (const std::string& text : src)
        sources.push_back({ds::IpAddress::parse(text), false});
    for (const std::string& text : deprecated) {
        ds::IpAddress addr = ds::IpAddress::parse(text);
        bool found = false;
        for (ds::SourceCandidate& cand : sources)
            if (cand.addr == addr) {
                cand.deprecated = true;
                found = true;
            }
        if (!found)
            throw ds::ConfigError("--deprecated " + text + " is not listed in --src");
    }
    return sources;
}

std::vector<ds::IpAddress> make_dests(const std::vector<std::string>& dst) {
    std::vector<ds::IpAddress> dests;
    for (const std::string& text : dst) dests.push_back(ds::IpAddress::parse(text));
    return dests;
}

ordered_json pair_json(const ds::CandidatePair& pair, std::size_t rank) {
    ordered_json j;
    j["rank"] = rank;
    j["source"] = pair.source.addr.str();
    j["destination"] = pair.dest.str();
    j["family"] = ds::to_string(pair.family());
    j["source_label"] = pair.source_label;
    j["dest_label"] = pair.dest_label;
    j["dest_precedence"] = pair.dest_precedence;
    j["common_prefix"] = pair.common_prefix;
    return j;
}

ordered_json sort_json(const ds::SortResult& sorted) {
    ordered_json j;
    j["pairs"] = ordered_json::array();
    for (std::size_t i = 0; i < sorted.pairs.size(); ++i) {
        ordered_json p = pair_json(sorted.pairs[i], i + 1);
        if (i + 1 < sorted.pairs.size()) {
            ds::PairOrdering ord = ds::compare_pairs(sorted.pairs[i], sorted.pairs[i + 1]);
            p["decided_by"] = ds::to_string(ord.rule);
        } else {
            p["decided_by"] = nullptr;
        }
        j["pairs"].push_back(std::move(p));
    }
    j["dropped"] = ordered_json::array();
    for (const auto& drop : sorted.dropped)
        j["dropped"].push_back(
            {{"destination", drop.dest.str()}, {"reason", ds::to_string(drop.reason)}});
    return j;
}

void print_sort_text(const ds::SortResult& sorted) {
    std::printf("%-5s %-28s %-28s %s\n", "rank", "source", "destination", "decided-by");
    for (std::size_t i = 0; i < sorted.pairs.size(); ++i) {
        const ds::CandidatePair& pair = sorted.pairs[i];
        std::string rule = "-";
        if (i + 1 < sorted.pairs.size())
            rule = std::string(
                ds::to_string(ds::compare_pairs(pair, sorted.pairs[i + 1]).rule));
        std::printf("%-5zu %-28s %-28s %s\n", i + 1, pair.source.addr.str().c_str(),
                    pair.dest.str().c_str(), rule.c_str());
    }
    for (const auto& drop : sorted.dropped)
        std::printf("dropped: %s (%s)\n", drop.dest.str().c_str(),
                    std::string(ds::to_string(drop.reason)).c_str());
}

ordered_json race_json(const ds::RaceOutcome& outcome,
                       const std::vector<ds::CandidatePair>& pairs) {
    ordered_json j;
    j["timeline"] = ordered_json::array();
    for (const ds::RaceEvent& ev : outcome.timeline)
        j["timeline"].push_back({{"t_us", ev.time_us},
                                 {"event", ds::to_string(ev.kind)},
                                 {"candidate", ev.candidate},
                                 {"destination", pairs[ev.candidate].dest.str()}});
    if (outcome.winner) {
        j["winner"] = {{"candidate", *outcome.winner},
                       {"destination", pairs[*outcome.winner].dest.str()},
                       {"family", ds::to_string(*outcome.winner_family)},
                       {"t_us", outcome.winner_time_us}};
    } else {
        j["winner"] = nullptr;
    }
    return j;
}

void print_race_text(const ds::RaceOutcome& outcome, const std::vector<ds::CandidatePair>& pairs) {
    for (const ds::RaceEvent& ev : outcome.timeline)
        std::printf("t=%-10lld %-16s [%zu] %s\n", static_cast<long long>(ev.time_us),
                    std::string(ds::to_string(ev.kind)).c_str(), ev.candidate,
                    pairs[ev.candidate].dest.str().c_str());
    if (outcome.winner)
        std::printf("winner: %s (%s) at %lld us\n",
                    pairs[*outcome.winner].dest.str().c_str(),
                    std::string(ds::to_string(*outcome.winner_family)).c_str(),
                    static_cast<long long>(outcome.winner_time_us));
    else
        std::printf("winner: none (all attempts failed)\n");
}

ordered_json fractions_json(const ds::MonteCarloResult& mc) {
    return ordered_json{{"trials", mc.trials},
                        {"v4_wins", mc.v4_wins()},
                        {"v6_wins", mc.v6_wins()},
                        {"failures", mc.failures()}};
}

int cmd_rank(const GlobalOpts& g, const std::vector<std::string>& src,
             const std::vector<std::string>& dst, const std::vector<std::string>& deprecated) {
    ds::PolicyTable table = resolve_policy(g.policy);
    ds::SortResult sorted = ds::sort_destinations(make_dests(dst), make_sources(src, deprecated),
                                                  table);
    if (g.json) {
        std::cout << sort_json(sorted).dump(2) << '\n';
    } else {
        print_sort_text(sorted);
    }
    return 0;
}

int cmd_race(const GlobalOpts& g, const std::vector<std::string>& src,
             const std::vector<std::string>& dst, const std::vector<std::string>& deprecated,
             const std::vector<std::string>& net, double delay_ms, std::size_t max_attempts,
             std::size_t trials) {
    ds::Scenario scenario;
    scenario.name = "race";
    ds::set_policy_choice(scenario, g.policy, "");
    scenario.sources = make_sources(src, deprecated);
    scenario.destinations = make_dests(dst);
    scenario.trials = trials;
    scenario.seed = g.seed;
    if (delay_ms <= 0) throw ds::ConfigError("--delay-ms must be positive");
    scenario.race.attempt_delay_us = std::llround(delay_ms * 1000.0);
    if (max_attempts > 0) scenario.race.max_attempts = max_attempts;
    for (const std::string& entry : net) {
        std::size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw ds::ConfigError("--net wants ADDR=dist:params, got '" + entry + "'");
        ds::IpAddress dest = ds::IpAddress::parse(entry.substr(0, eq));
        std::vector<std::string> tokens;
        std::string rest = entry.substr(eq + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            std::size_t colon = rest.find(':', pos);
            if (colon == std::string::npos) {
                tokens.push_back(rest.substr(pos));
                break;
            }
            tokens.push_back(rest.substr(pos, colon - pos));
            pos = colon + 1;
        }
        scenario.network.set(dest, ds::detail::parse_latency_tokens(tokens, "--net " + entry));
    }

    ds::ScenarioResult result = ds::run_scenario(scenario);
    if (g.json) {
        ordered_json j;
        j["order"] = sort_json(result.sorted);
        if (result.race) j["race"] = race_json(*result.race, result.sorted.pairs);
        j["fractions"] = fractions_json(result.fractions);
        j["verdict"] = ds::to_string(result.verdict);
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    print_sort_text(result.sorted);
    if (result.race) print_race_text(*result.race, result.sorted.pairs);
    std::printf("verdict: %s (v4=%s v6=%s failures=%s over %zu trial%s)\n",
                std::string(ds::to_string(result.verdict)).c_str(),
                ds::fmt_double(result.fractions.v4_wins()).c_str(),
                ds::fmt_double(result.fractions.v6_wins()).c_str(),
                ds::fmt_double(result.fractions.failures()).c_str(), result.fractions.trials,
                result.fractions.trials == 1 ? "" : "s");
    return 0;
}

int cmd_scenario(const GlobalOpts& g, const std::string& file, std::size_t trials_override,
                 bool seed_given, bool policy_given) {
    ds::Scenario scenario = ds::load_scenario_file(file);
    if (trials_override > 0) scenario.trials = trials_override;
    if (seed_given) scenario.seed = g.seed;
    if (policy_given) ds::set_policy_choice(scenario, g.policy, "");
    ds::ScenarioResult result = ds::run_scenario(scenario);
    if (g.json) {
        ordered_json j;
        j["name"] = scenario.name;
        j["trials"] = scenario.trials;
        j["seed"] = scenario.seed;
        j["order"] = sort_json(result.sorted);
        if (result.race) j["race"] = race_json(*result.race, result.sorted.pairs);
        j["fractions"] = fractions_json(result.fractions);
        j["verdict"] = ds::to_string(result.verdict);
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::printf("scenario: %s\n", scenario.name.c_str());
    print_sort_text(result.sorted);
    if (result.race) print_race_text(*result.race, result.sorted.pairs);
    std::printf("verdict: %s (v4=%s v6=%s failures=%s over %zu trial%s)\n",
                std::string(ds::to_string(result.verdict)).c_str(),
                ds::fmt_double(result.fractions.v4_wins()).c_str(),
                ds::fmt_double(result.fractions.v6_wins()).c_str(),
                ds::fmt_double(result.fractions.failures()).c_str(), result.fractions.trials,
                result.fractions.trials == 1 ? "" : "s");
    return 0;
}

int cmd_classify(const GlobalOpts& g, const ds::DirectoryPaths& paths, const std::string& log,
                 const std::string& out_dir, double min_sessions, double min_dual_safe,
                 bool include_undersampled) {
    ds::SessionLogStats stats;
    std::vector<ds::Session> sessions = ds::load_session_log_file(log, g.strict, &stats);
    std::size_t loaded = sessions.size();
    sessions = ds::dedupe(sessions);
    std::size_t duplicates = loaded - sessions.size();

    ds::Directory dir = ds::load_directory(paths);
    ds::Accumulator acc;
    for (const ds::Session& s : sessions) acc.add(s, ds::classify_session(s, dir));

    ds::AggregateOptions opt;
    opt.min_mean_sessions_per_day = min_sessions;
    opt.min_dual_safe_per_day = min_dual_safe;
    ds::AggregateResult result = ds::aggregate(acc, opt);

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        auto write = [&](const char* name, const std::string& content) {
            std::ofstream out(std::filesystem::path(out_dir) / name);
            out << content;
        };
        write("report.csv", ds::report_to_csv(result, include_undersampled));
        write("report.json", ds::report_to_json(result, include_undersampled).dump(2) + "\n");
        write("sessions_per_day.csv", ds::plot_sessions_per_day_csv(result));
        write("category_distribution.csv", ds::plot_category_distribution_csv(result));
        write("leak_rates.csv", ds::plot_leak_rates_csv(result));
        write("depreference.csv", ds::plot_depreference_csv(result));
    }

    std::uint64_t unknown_as = 0;
    for (const auto& [provider, counts] : acc.providers()) unknown_as += counts.unknown_as;

    if (g.json) {
        ordered_json j = ds::report_to_json(result, include_undersampled);
        ordered_json diag;
        diag["rows"] = stats.rows;
        diag["skipped_rows"] = stats.skipped;
        diag["duplicates_removed"] = duplicates;
        diag["sessions"] = sessions.size();
        diag["unknown_as_sessions"] = unknown_as;
        diag["providers_detected"] = acc.providers().size();
        diag["providers_reported"] = result.providers.size();
        diag["providers_undersampled"] = result.undersampled.size();
        j["diagnostics"] = std::move(diag);
        std::cout << j.dump(2) << '\n';
        return 0;
    }

    std::printf("%zu rows, %zu skipped, %zu duplicates removed, %zu sessions over %d day%s\n",
                stats.rows, stats.skipped, duplicates, sessions.size(), result.days,
                result.days == 1 ? "" : "s");
    std::printf("%zu providers reported (%zu undersampled), %llu non-VPN sessions\n",
                result.providers.size(), result.undersampled.size(),
                static_cast<unsigned long long>(result.non_vpn_sessions));
    if (unknown_as)
        std::printf("coverage: %llu dual-stack sessions had a v6 outside every known AS prefix\n",
                    static_cast<unsigned long long>(unknown_as));
    for (const ds::ProviderReport& p : result.providers) {
        std::string depref = p.depref_rate ? ds::fmt_double(*p.depref_rate) : "-";
        std::printf("%-16s %8s/day  leak_all=%-8s leak_dual=%-8s depref=%s\n",
                    p.provider.c_str(), ds::fmt_double(p.mean_sessions_per_day).c_str(),
                    ds::fmt_double(p.leak_rate_all).c_str(),
                    ds::fmt_double(p.leak_rate_dual).c_str(), depref.c_str());
    }
    if (!result.depreference.omitted.empty()) {
        std::printf("depreference omitted (below %s dual-safe/day):",
                    ds::fmt_double(min_dual_safe).c_str());
        for (const std::string& name : result.depreference.omitted)
            std::printf(" %s", name.c_str());
        std::printf("\n");
    }
    if (result.depreference.weighted_mean)
        std::printf("weighted mean depreference: %s\n",
                    ds::fmt_double(*result.depreference.weighted_mean).c_str());
    if (!out_dir.empty()) std::printf("wrote report and plot data to %s\n", out_dir.c_str());
    return 0;
}

int cmd_report(const GlobalOpts& g, const std::string& file, bool as_csv) {
    std::ifstream in(file);
    if (!in) throw ds::ConfigError("cannot open report '" + file + "'");
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ds::ParseError(file + ": " + e.what());
    }
    if (!doc.contains("providers") || !doc["providers"].is_array())
        throw ds::ParseError(file + ": not a report (missing providers array)");
    if (g.json) {
        std::cout << doc.dump(2) << '\n';
        return 0;
    }
    if (as_csv) {
        std::cout << ds::kReportCsvHeader << '\n';
        for (const auto& p : doc["providers"]) {
            std::string depref;
            if (p.contains("depref_rate") && !p["depref_rate"].is_null())
                depref = ds::fmt_double(p["depref_rate"].get<double>());
            std::printf("%s,%d,%s,%llu,%llu,%llu,%llu,%llu,%llu,%llu,%s,%s,%s,%d\n",
                        p["provider"].get<std::string>().c_str(), p["days"].get<int>(),
                        ds::fmt_double(p["mean_sessions_per_day"].get<double>()).c_str(),
                        p["total_sessions"].get<unsigned long long>(),
                        p["v4_only"].get<unsigned long long>(),
                        p["dual_safe"].get<unsigned long long>(),
                        p["dual_safe_prefetch"].get<unsigned long long>(),
                        p["dual_safe_partial"].get<unsigned long long>(),
                        p["leak"].get<unsigned long long>(),
                        p["unknown_as"].get<unsigned long long>(),
                        ds::fmt_double(p["leak_rate_all"].get<double>()).c_str(),
                        ds::fmt_double(p["leak_rate_dual"].get<double>()).c_str(), depref.c_str(),
                        p["undersampled"].get<bool>() ? 1 : 0);
        }
        return 0;
    }
    std::printf("%-16s %12s %10s %10s %10s %8s\n", "provider", "mean/day", "total", "leak_all",
                "leak_dual", "depref");
    for (const auto& p : doc["providers"]) {
        std::string depref = "-";
        if (p.contains("depref_rate") && !p["depref_rate"].is_null())
            depref = ds::fmt_double(p["depref_rate"].get<double>());
        std::printf("%-16s %12s %10llu %10s %10s %8s\n",
                    p["provider"].get<std::string>().c_str(),
                    ds::fmt_double(p["mean_sessions_per_day"].get<double>()).c_str(),
                    p["total_sessions"].get<unsigned long long>(),
                    ds::fmt_double(p["leak_rate_all"].get<double>()).c_str(),
                    ds::fmt_double(p["leak_rate_dual"].get<double>()).c_str(), depref.c_str());
    }
    return 0;
}

int cmd_gen_fixture(const GlobalOpts& g, const std::string& out_dir, int days) {
    ds::FixtureSpec spec;
    spec.out_dir = out_dir;
    spec.days = days;
    spec.seed = g.seed;
    ds::FixtureFiles files;
    ordered_json manifest = ds::generate_fixture(spec, &files);
    if (g.json) {
        std::cout << manifest.dump(2) << '\n';
        return 0;
    }
    std::printf("wrote %s (%llu rows, %llu unique sessions, %d days)\n", files.sessions.c_str(),
                manifest["raw_rows"].get<unsigned long long>(),
                manifest["unique_sessions"].get<unsigned long long>(), days);
    std::printf("manifest: %s\n", files.manifest.c_str());
    return 0;
}

// Built-in checks: the class-pair ranking against its frozen expectation,
// the tunnel-local flip, and the staggered-race tail probability against
// the closed-form value. DUALSTACK_SELFTEST_POLICY overrides the policy
// table so a corrupted table can be shown to fail.
int cmd_selftest(const GlobalOpts& g, std::size_t trials) {
    ordered_json checks;
    bool pass = true;
    auto record = [&](const char* name, bool ok, const std::string& detail) {
        checks[name] = ok;
        pass = pass && ok;
        if (!g.json)
            std::printf("%s %s%s%s\n", ok ? "ok" : "FAIL", name, detail.empty() ? "" : ": ",
                        detail.c_str());
    };

    ds::PolicyTable table = ds::default_policy();
    const char* override_path = std::getenv("DUALSTACK_SELFTEST_POLICY");
    if (override_path) table = ds::load_policy_file(override_path);

    {
        using AC = ds::AddressClass;
        const std::pair<AC, AC> pairs[] = {
            {AC::Gua, AC::Gua},           {AC::Ula, AC::Ula},
            {AC::PublicV4, AC::PublicV4}, {AC::PrivateV4, AC::PrivateV4},
            {AC::PrivateV4, AC::PublicV4}, {AC::Ula, AC::Gua},
        };
        std::string detail;
        bool ok = true;
        for (int i = 0; i < 6; ++i) {
            int rank = ds::rank_pair_class(pairs[i].first, pairs[i].second, table);
            if (rank != i + 1) {
                ok = false;
                detail += "(" + std::string(ds::to_string(pairs[i].first)) + "," +
                          std::string(ds::to_string(pairs[i].second)) + ") ranked " +
                          std::to_string(rank) + " want " + std::to_string(i + 1) + "; ";
            }
        }
        record("ranking-golden", ok, detail);
    }

    {
        ds::PolicyTable flip_table =
            override_path ? table : ds::tla_policy();
        auto order_for = [&](const char* v6_source, const ds::PolicyTable& t) {
            std::vector<ds::SourceCandidate> sources = {
                {ds::IpAddress::parse(v6_source), false},
                {ds::IpAddress::parse("10.0.0.2"), false}};
            std::vector<ds::IpAddress> dests = {ds::IpAddress::parse("2001:db8::10"),
                                                ds::IpAddress::parse("203.0.113.10")};
            ds::SortResult sorted = ds::sort_destinations(dests, sources, t);
            ds::NetworkModel net;
            net.set(dests[0], ds::LatencySpec::constant(100));
            net.set(dests[1], ds::LatencySpec::constant(100));
            ds::RaceOutcome outcome = ds::run_race(sorted.pairs, net, {}, 0);
            return *outcome.winner_family;
        };
        bool ok = order_for("fd00::2", ds::default_policy()) == ds::Family::V4 &&
                  order_for("fc00::2", flip_table) == ds::Family::V6;
        record("tunnel-local-flip", ok, ok ? "" : "expected v4 under stock, v6 under tunnel-local");
    }

    {
        std::vector<ds::SourceCandidate> sources = {{ds::IpAddress::parse("fd00::2"), false},
                                                    {ds::IpAddress::parse("10.0.0.2"), false}};
        std::vector<ds::IpAddress> dests = {ds::IpAddress::parse("2001:db8::10"),
                                            ds::IpAddress::parse("203.0.113.10")};
        ds::SortResult sorted = ds::sort_destinations(dests, sources, ds::default_policy());
        ds::NetworkModel net;
        net.set(ds::IpAddress::parse("203.0.113.10"), ds::LatencySpec::exponential(200));
        net.set(ds::IpAddress::parse("2001:db8::10"), ds::LatencySpec::constant(10));
        ds::MonteCarloResult mc =
            ds::run_monte_carlo(sorted.pairs, net, {}, trials, g.seed);
        // v6 wins exactly when the v4 latency exceeds delay + v6 latency.
        double expected = std::exp(-260.0 / 200.0);
        double got = mc.v6_wins();
        bool ok = std::abs(got - expected) <= 0.02;
        record("race-tail-probability", ok,
               "got " + ds::fmt_double(got) + ", expected " + ds::fmt_double(expected) +
                   " within 0.02");
    }

    if (g.json) {
        ordered_json j;
        j["checks"] = std::move(checks);
        j["pass"] = pass;
        std::cout << j.dump(2) << '\n';
    }
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-stack address selection, connection racing, and leak analysis"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--policy", g.policy, "policy table: default, tla, or file:PATH")
        ->capture_default_str();
    auto* seed_opt = app.add_option("--seed", g.seed, "seed for randomized latencies");
    auto* policy_opt = app.get_option("--policy");
    app.add_flag("--json", g.json, "machine-readable output");
    app.add_flag("--strict", g.strict, "fail on malformed input rows instead of skipping");

    std::vector<std::string> src, dst, deprecated, net;
    double delay_ms = 250.0;
    std::size_t max_attempts = 0, trials = 1;

    auto* rank = app.add_subcommand("rank", "order destination/source pairs");
    rank->fallthrough();
    rank->add_option("--src", src, "source address")->required();
    rank->add_option("--dst", dst, "destination address")->required();
    rank->add_option("--deprecated", deprecated, "mark a source address deprecated");

    auto* race = app.add_subcommand("race", "race connections over a latency model");
    race->fallthrough();
    race->add_option("--src", src, "source address")->required();
    race->add_option("--dst", dst, "destination address")->required();
    race->add_option("--deprecated", deprecated, "mark a source address deprecated");
    race->add_option("--net", net, "latency entry ADDR=dist:params (constant:MS, uniform:LO:HI, "
                                   "exponential:MEAN, normal:MEAN:SD; append :fail)")
        ->required();
    race->add_option("--delay-ms", delay_ms, "stagger between attempts")->capture_default_str();
    race->add_option("--max-attempts", max_attempts, "cap the number of attempts");
    race->add_option("--trials", trials, "run this many seeded races")->capture_default_str();

    std::string scenario_file;
    std::size_t scenario_trials = 0;
    auto* scenario = app.add_subcommand("scenario", "run a scenario file");
    scenario->fallthrough();
    scenario->add_option("file", scenario_file, "scenario path")->required();
    scenario->add_option("--trials", scenario_trials, "override the scenario's trial count");

    ds::DirectoryPaths paths;
    std::string log_file, out_dir;
    double min_sessions = 100.0, min_dual_safe = 20.0;
    bool include_undersampled = false;
    auto* classify = app.add_subcommand("classify", "classify a session log");
    classify->fallthrough();
    classify->add_option("--log", log_file, "session log CSV")->required();
    classify->add_option("--vpn", paths.vpn, "VPN prefix directory CSV")->required();
    classify->add_option("--as-prefixes", paths.as_prefixes, "AS prefix CSV")->required();
    classify->add_option("--orgs", paths.orgs, "AS-to-organization CSV")->required();
    classify->add_option("--categories", paths.categories, "AS-to-category CSV")->required();
    classify->add_option("--prefetch", paths.prefetch, "prefetch prefix list");
    classify->add_option("--out-dir", out_dir, "write report and plot data here");
    classify->add_option("--min-sessions-per-day", min_sessions,
                         "report providers above this mean")
        ->capture_default_str();
    classify->add_option("--min-dual-safe-per-day", min_dual_safe,
                         "de-preference rate threshold")
        ->capture_default_str();
    classify->add_flag("--include-undersampled", include_undersampled,
                       "keep providers below the session threshold in the report");

    std::string report_file;
    bool report_csv = false;
    auto* report = app.add_subcommand("report", "render a written report.json");
    report->fallthrough();
    report->add_option("file", report_file, "report.json path")->required();
    report->add_flag("--csv", report_csv, "emit CSV instead of a table");

    std::size_t selftest_trials = 10000;
    auto* selftest = app.add_subcommand("selftest", "run the built-in checks");
    selftest->fallthrough();
    selftest->add_option("--trials", selftest_trials, "trials for the race tail check")
        ->capture_default_str();

    std::string fixture_dir;
    int fixture_days = 5;
    auto* gen = app.add_subcommand("gen-fixture", "write a synthetic session-log corpus");
    gen->fallthrough();
    gen->add_option("--out-dir", fixture_dir, "output directory")->required();
    gen->add_option("--days", fixture_days, "days of traffic")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (rank->parsed()) return cmd_rank(g, src, dst, deprecated);
        if (race->parsed())
            return cmd_race(g, src, dst, deprecated, net, delay_ms, max_attempts, trials);
        if (scenario->parsed())
            return cmd_scenario(g, scenario_file, scenario_trials, seed_opt->count() > 0,
                                policy_opt->count() > 0);
        if (classify->parsed())
            return cmd_classify(g, paths, log_file, out_dir, min_sessions, min_dual_safe,
                                include_undersampled);
        if (report->parsed()) return cmd_report(g, report_file, report_csv);
        if (selftest->parsed()) return cmd_selftest(g, selftest_trials);
        if (gen->parsed()) return cmd_gen_fixture(g, fixture_dir, fixture_days);
    } catch (const ds::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
    return 2;
}
