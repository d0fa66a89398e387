#include <catch_amalgamated.hpp>

#include <sstream>

#include "dualstack/csv.hpp"
#include "helpers.hpp"

using namespace dualstack;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<Session> load(const std::string& text, bool strict = false,
                          SessionLogStats* stats = nullptr) {
    std::istringstream in(text);
    return load_session_log(in, "log.csv", strict, stats);
}

const char* kHeader = "timestamp,session_id,v4,v6,preferred\n";

} // namespace

TEST_CASE("well-formed session rows load") {
    auto sessions = load(std::string(kHeader) +
                         "1000,s1,101.10.0.5,2001:db8::1,v6\n"
                         "1060,s2,101.10.0.6,,v4\n"
                         "1120,s3,,2001:db8::2,v6\n"
                         "\n"
                         "1180,s4,::ffff:101.10.0.7,2001:db8::3,v4\n");
    REQUIRE(sessions.size() == 4);
    CHECK(sessions[0].timestamp == 1000);
    CHECK(sessions[0].session_id == "s1");
    CHECK(sessions[0].v4 == IpAddress::parse("101.10.0.5"));
    CHECK(sessions[0].v6 == IpAddress::parse("2001:db8::1"));
    CHECK(sessions[0].preferred == Family::V6);
    CHECK_FALSE(sessions[1].v6.has_value());
    CHECK(sessions[1].preferred == Family::V4);
    CHECK_FALSE(sessions[2].v4.has_value());
    CHECK(sessions[3].v4 == IpAddress::parse("101.10.0.7"));
}

TEST_CASE("the session header is mandatory and exact") {
    CHECK_THROWS_WITH(load(""), ContainsSubstring("empty session log"));
    CHECK_THROWS_WITH(load("ts,id,v4,v6,pref\n1,a,1.2.3.4,,v4\n"),
                      ContainsSubstring("log.csv:1"));
}

TEST_CASE("bad rows throw in strict mode, are counted otherwise") {
    const std::string bad_rows = std::string(kHeader) +
                                 "1000,ok,101.10.0.5,,v4\n"
                                 "-5,neg,101.10.0.5,,v4\n"
                                 "x,nan,101.10.0.5,,v4\n"
                                 "1000,fields,101.10.0.5,v4\n"
                                 "1000,swap,2001:db8::1,101.10.0.5,v4\n"
                                 "1000,noaddr,,,v4\n"
                                 "1000,badpref,101.10.0.5,,maybe\n"
                                 "1000,orphan,101.10.0.5,,v6\n"
                                 "2000,ok2,101.10.0.6,,v4\n";

    SessionLogStats stats;
    auto sessions = load(bad_rows, false, &stats);
    REQUIRE(sessions.size() == 2);
    CHECK(sessions[0].session_id == "ok");
    CHECK(sessions[1].session_id == "ok2");
    CHECK(stats.rows == 9);
    CHECK(stats.skipped == 7);

    CHECK_THROWS_AS(load(bad_rows, true), ParseError);
    CHECK_THROWS_WITH(load(std::string(kHeader) + "-5,neg,101.10.0.5,,v4\n", true),
                      ContainsSubstring("log.csv:2") && ContainsSubstring("negative"));
    CHECK_THROWS_WITH(load(std::string(kHeader) + "1,s,101.10.0.5,10.0.0.1,v4\n", true),
                      ContainsSubstring("not a v6 address"));
    CHECK_THROWS_WITH(load(std::string(kHeader) + "1,s,101.10.0.5,,v6\n", true),
                      ContainsSubstring("preferred family has no address"));
}

TEST_CASE("session rows round-trip through their csv form") {
    auto sessions = load(std::string(kHeader) +
                         "1000,s1,101.10.0.5,2001:db8::1,v6\n"
                         "1060,s2,101.10.0.6,,v4\n");
    for (const Session& s : sessions) {
        auto back = load(std::string(kHeader) + session_to_csv_row(s) + "\n", true);
        REQUIRE(back.size() == 1);
        REQUIRE(back[0] == s);
    }
}

TEST_CASE("vpn directory loads and rejects conflicts") {
    Directory dir;
    std::istringstream in("prefix,provider\n"
                          "101.10.0.0/16,aurora\n"
                          "2001:abcd::/32,borealis\n"
                          "101.10.0.0/16,aurora\n");
    load_vpn_directory(in, "vpn.csv", dir);
    CHECK(*dir.vpn.lookup(IpAddress::parse("101.10.3.4"))->value == "aurora");
    CHECK(*dir.vpn.lookup(IpAddress::parse("2001:abcd::9"))->value == "borealis");
    CHECK_FALSE(dir.vpn.lookup(IpAddress::parse("8.8.8.8")).has_value());

    std::istringstream conflicted("prefix,provider\n"
                                  "101.10.0.0/16,aurora\n"
                                  "101.10.0.0/16,borealis\n");
    Directory fresh;
    CHECK_THROWS_WITH(load_vpn_directory(conflicted, "vpn.csv", fresh),
                      ContainsSubstring("vpn.csv:3") && ContainsSubstring("aurora"));

    std::istringstream badheader("provider,prefix\n");
    CHECK_THROWS_WITH(load_vpn_directory(badheader, "vpn.csv", fresh),
                      ContainsSubstring("vpn.csv:1"));

    std::istringstream empty_provider("prefix,provider\n101.10.0.0/16,\n");
    CHECK_THROWS_WITH(load_vpn_directory(empty_provider, "vpn.csv", fresh),
                      ContainsSubstring("empty provider"));
}

TEST_CASE("as prefixes pick the longest match") {
    Directory dir;
    std::istringstream in("prefix,asn\n"
                          "101.0.0.0/8,64000\n"
                          "101.10.0.0/16,64500\n"
                          "2001:aaaa::/32,64501\n");
    load_as_prefixes(in, "as.csv", dir);
    CHECK(dir.asn_of(IpAddress::parse("101.10.0.5")) == 64500u);
    CHECK(dir.asn_of(IpAddress::parse("101.99.0.5")) == 64000u);
    CHECK(dir.asn_of(IpAddress::parse("2001:aaaa:1::5")) == 64501u);
    CHECK_FALSE(dir.asn_of(IpAddress::parse("2001:bbbb::5")).has_value());

    std::istringstream conflicted("prefix,asn\n101.0.0.0/8,1\n101.0.0.0/8,2\n");
    Directory fresh;
    CHECK_THROWS_WITH(load_as_prefixes(conflicted, "as.csv", fresh),
                      ContainsSubstring("as.csv:3"));
    std::istringstream nan("prefix,asn\n101.0.0.0/8,banana\n");
    CHECK_THROWS_WITH(load_as_prefixes(nan, "as.csv", fresh), ContainsSubstring("banana"));
}

TEST_CASE("as maps hold orgs and categories") {
    std::map<std::uint32_t, std::string> orgs;
    std::istringstream in("asn,org_id\n64500,org-a\n64501,org-b\n64500,org-a\n");
    load_as_map(in, "orgs.csv", "asn,org_id", orgs);
    CHECK(orgs.size() == 2);
    CHECK(orgs.at(64500) == "org-a");

    std::istringstream conflicted("asn,org_id\n64500,org-a\n64500,org-b\n");
    std::map<std::uint32_t, std::string> fresh;
    CHECK_THROWS_WITH(load_as_map(conflicted, "orgs.csv", "asn,org_id", fresh),
                      ContainsSubstring("orgs.csv:3") && ContainsSubstring("org-b"));

    std::istringstream wrong_header("asn,category\n64500,ISP\n");
    CHECK_THROWS_AS(load_as_map(wrong_header, "orgs.csv", "asn,org_id", fresh), ParseError);
}

TEST_CASE("prefix lists take comments and blanks") {
    PrefixMap<bool> ranges;
    std::istringstream in("# resolver ranges\n"
                          "2001:eeee::/32\n"
                          "\n"
                          "2001:ffff::/32  # trailing note\n");
    load_prefix_list(in, "prefetch.txt", ranges);
    CHECK(ranges.contains(IpAddress::parse("2001:eeee::1")));
    CHECK(ranges.contains(IpAddress::parse("2001:ffff::1")));
    CHECK_FALSE(ranges.contains(IpAddress::parse("2001:dddd::1")));

    PrefixMap<bool> fresh;
    std::istringstream bad("2001:eeee::/32\nnot-a-prefix\n");
    CHECK_THROWS_WITH(load_prefix_list(bad, "prefetch.txt", fresh),
                      ContainsSubstring("prefetch.txt:2"));
}

TEST_CASE("missing directory files fail by path") {
    DirectoryPaths paths;
    paths.vpn = "/nonexistent/vpn.csv";
    paths.as_prefixes = "/nonexistent/as.csv";
    paths.orgs = "/nonexistent/orgs.csv";
    paths.categories = "/nonexistent/cats.csv";
    CHECK_THROWS_WITH(load_directory(paths), ContainsSubstring("/nonexistent/vpn.csv"));
}

TEST_CASE("doubles render shortest-round-trip") {
    CHECK(fmt_double(0.5) == "0.5");
    CHECK(fmt_double(1.0) == "1");
    CHECK(fmt_double(0.0) == "0");
    CHECK(fmt_double(0.065) == "0.065");
    CHECK(fmt_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(std::stod(fmt_double(325.0 / 5000.0)) == 325.0 / 5000.0);
}
