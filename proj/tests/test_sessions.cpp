#include <catch_amalgamated.hpp>

#include <random>

#include "dualstack/sessions.hpp"
#include "helpers.hpp"

using namespace dualstack;

namespace {

Session make(std::int64_t ts, const char* v4, const char* v6, const char* id = "s") {
    Session s;
    s.timestamp = ts;
    s.session_id = id;
    if (v4) s.v4 = IpAddress::parse(v4);
    if (v6) s.v6 = IpAddress::parse(v6);
    return s;
}

// Two v4 exit ranges for aurora backed by different organizations, one
// for borealis, plus a borealis v6 exit range living in ISP-categorized
// space. 2001:eeee::/32 is a prefetch range; 2001:9999::/32 is covered by
// no AS prefix at all.
Directory make_directory(bool with_prefetch = true) {
    Directory dir;
    dir.vpn.insert(Prefix::parse("101.10.0.0/16"), "aurora");
    dir.vpn.insert(Prefix::parse("101.20.0.0/16"), "aurora");
    dir.vpn.insert(Prefix::parse("102.20.0.0/16"), "borealis");
    dir.vpn.insert(Prefix::parse("2001:abcd::/32"), "borealis");

    dir.as_prefix.insert(Prefix::parse("101.10.0.0/16"), 64500);
    dir.as_prefix.insert(Prefix::parse("101.20.0.0/16"), 64504);
    dir.as_prefix.insert(Prefix::parse("102.20.0.0/16"), 64501);
    dir.as_prefix.insert(Prefix::parse("2001:aaaa::/32"), 64500);
    dir.as_prefix.insert(Prefix::parse("2001:dddd::/32"), 64504);
    dir.as_prefix.insert(Prefix::parse("2001:bbbb::/32"), 64502);
    dir.as_prefix.insert(Prefix::parse("2001:cccc::/32"), 64503);
    dir.as_prefix.insert(Prefix::parse("2001:abcd::/32"), 64505);
    dir.as_prefix.insert(Prefix::parse("2001:eeee::/32"), 64506);

    dir.org_of_asn = {{64500, "org-aurora"},   {64504, "org-aurora-b"},
                      {64501, "org-borealis"}, {64502, "org-isp"},
                      {64503, "org-host"},     {64505, "org-borealis"},
                      {64506, "org-resolver"}};
    dir.category_of_asn = {{64500, "VPN"}, {64504, "ISP"},     {64501, "VPN"},
                           {64502, "ISP"}, {64503, "Hosting"}, {64505, "ISP"},
                           {64506, "ISP"}};
    if (with_prefetch) dir.prefetch.insert(Prefix::parse("2001:eeee::/32"), true);
    dir.finalize();
    return dir;
}

} // namespace

TEST_CASE("repeats within an hour collapse to the earliest") {
    auto a = make(1000, "101.10.0.5", "2001:bbbb::1", "a");
    auto b = make(1600, "101.10.0.5", "2001:bbbb::1", "b");
    auto out = dedupe({a, b});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == a);

    // two hours apart: both stay
    auto c = make(1000 + 7200, "101.10.0.5", "2001:bbbb::1", "c");
    CHECK(dedupe({a, c}).size() == 2);
}

TEST_CASE("the hour is a UTC bucket, not a sliding window") {
    auto late = make(3599, "101.10.0.5", "2001:bbbb::1");
    auto next = make(3600, "101.10.0.5", "2001:bbbb::1");
    CHECK(dedupe({late, next}).size() == 2);

    auto first = make(0, "101.10.0.5", "2001:bbbb::1");
    CHECK(dedupe({first, late}).size() == 1);
}

TEST_CASE("the earliest copy wins regardless of input position") {
    auto later = make(2000, "101.10.0.5", "2001:bbbb::1", "later");
    auto earlier = make(200, "101.10.0.5", "2001:bbbb::1", "earlier");
    auto out = dedupe({later, earlier});
    REQUIRE(out.size() == 1);
    CHECK(out[0].session_id == "earlier");
}

TEST_CASE("address presence is part of the identity") {
    auto both = make(100, "101.10.0.5", "2001:bbbb::1");
    auto v4only = make(110, "101.10.0.5", nullptr);
    auto v6only = make(120, nullptr, "2001:bbbb::1");
    CHECK(dedupe({both, v4only, v6only}).size() == 3);
    CHECK(dedupe({v4only, make(130, "101.10.0.5", nullptr)}).size() == 1);

    // ids and preference are not part of the identity
    auto pref = both;
    pref.timestamp = 101;
    pref.preferred = Family::V6;
    pref.session_id = "other";
    CHECK(dedupe({both, pref}).size() == 1);
}

TEST_CASE("dedupe keeps input order and is idempotent") {
    std::mt19937_64 rng(67);
    const char* v4s[] = {"101.10.0.1", "101.10.0.2", nullptr};
    const char* v6s[] = {"2001:bbbb::1", "2001:bbbb::2", nullptr};
    for (int round = 0; round < 1000; ++round) {
        std::vector<Session> in;
        int n = int(rng() % 12);
        for (int i = 0; i < n; ++i) {
            const char* v4 = v4s[rng() % 3];
            const char* v6 = v6s[rng() % 3];
            if (!v4 && !v6) v4 = v4s[0];
            in.push_back(make(std::int64_t(rng() % 10000), v4, v6,
                              ("s" + std::to_string(i)).c_str()));
        }
        auto once = dedupe(in);
        REQUIRE(dedupe(once) == once);
        REQUIRE(once.size() <= in.size());

        // kept sessions appear in their input order
        std::size_t cursor = 0;
        for (const Session& s : once) {
            while (cursor < in.size() && !(in[cursor] == s)) ++cursor;
            REQUIRE(cursor < in.size());
            ++cursor;
        }
    }
}

TEST_CASE("sessions without a directory-listed v4 are not VPN traffic") {
    Directory dir = make_directory();
    CHECK(classify_session(make(0, nullptr, "2001:bbbb::1"), dir) ==
          Classification{SessionCategory::NonVpn, "", false});
    CHECK(classify_session(make(0, "8.8.8.8", "2001:bbbb::1"), dir).category ==
          SessionCategory::NonVpn);
    CHECK(classify_session(make(0, "8.8.8.8", nullptr), dir).category ==
          SessionCategory::NonVpn);
}

TEST_CASE("v4-only VPN sessions") {
    Directory dir = make_directory();
    Classification c = classify_session(make(0, "101.10.0.5", nullptr), dir);
    CHECK(c.category == SessionCategory::V4OnlyVpn);
    CHECK(c.provider == "aurora");
    CHECK(classify_session(make(0, "102.20.9.9", nullptr), dir).provider == "borealis");
}

TEST_CASE("prefetch ranges trump every other dual-stack reading") {
    Directory dir = make_directory();
    Classification c = classify_session(make(0, "101.10.0.5", "2001:eeee::1"), dir);
    CHECK(c.category == SessionCategory::DualSafePrefetch);
    CHECK(c.provider == "aurora");
    CHECK_FALSE(c.unknown_as);

    // without the prefetch table the same v6 reads as an ISP leak
    Directory bare = make_directory(false);
    CHECK(classify_session(make(0, "101.10.0.5", "2001:eeee::1"), bare).category ==
          SessionCategory::Leak);
}

TEST_CASE("a v6 landing in the provider's own organization is partial deployment") {
    Directory dir = make_directory();
    // same organization as the v4 side
    CHECK(classify_session(make(0, "101.10.0.5", "2001:aaaa::1"), dir).category ==
          SessionCategory::DualSafePartialDeployment);
    // the org behind the provider's other exit range, ISP category and all
    CHECK(classify_session(make(0, "101.10.0.5", "2001:dddd::1"), dir).category ==
          SessionCategory::DualSafePartialDeployment);
    // and directly under that other range's own v4
    CHECK(classify_session(make(0, "101.20.0.5", "2001:dddd::1"), dir).category ==
          SessionCategory::DualSafePartialDeployment);
    // borealis has no claim on aurora's organizations
    CHECK(classify_session(make(0, "102.20.0.5", "2001:aaaa::1"), dir).category ==
          SessionCategory::DualSafe);
}

TEST_CASE("leaks need an ISP v6 outside every VPN range in a foreign org") {
    Directory dir = make_directory();
    Classification c = classify_session(make(0, "101.10.0.5", "2001:bbbb::1"), dir);
    CHECK(c.category == SessionCategory::Leak);
    CHECK(c.provider == "aurora");

    // hosting-categorized v6: not a leak
    CHECK(classify_session(make(0, "101.10.0.5", "2001:cccc::1"), dir).category ==
          SessionCategory::DualSafe);
    // ISP-categorized but inside another VPN's exit range: not a leak
    CHECK(classify_session(make(0, "101.10.0.5", "2001:abcd::1"), dir).category ==
          SessionCategory::DualSafe);
    // same range under its own provider is partial deployment
    CHECK(classify_session(make(0, "102.20.0.5", "2001:abcd::1"), dir).category ==
          SessionCategory::DualSafePartialDeployment);
}

TEST_CASE("uncovered v6 space is safe but flagged") {
    Directory dir = make_directory();
    Classification c = classify_session(make(0, "101.10.0.5", "2001:9999::1"), dir);
    CHECK(c.category == SessionCategory::DualSafe);
    CHECK(c.unknown_as);
    CHECK(c.provider == "aurora");

    // the flag only rides on the fall-through reading
    CHECK_FALSE(classify_session(make(0, "101.10.0.5", "2001:bbbb::1"), dir).unknown_as);
    CHECK_FALSE(classify_session(make(0, "8.8.8.8", "2001:9999::1"), dir).unknown_as);
}

TEST_CASE("classification is total and internally consistent") {
    Directory dir = make_directory();
    std::mt19937_64 rng(71);
    const char* v4s[] = {"101.10.0.9", "101.20.0.9", "102.20.0.9", "8.8.8.8", nullptr};
    const char* v6s[] = {"2001:aaaa::9", "2001:bbbb::9", "2001:cccc::9", "2001:dddd::9",
                         "2001:eeee::9", "2001:abcd::9", "2001:9999::9", nullptr};
    for (int i = 0; i < 2000; ++i) {
        const char* v4 = v4s[rng() % 5];
        const char* v6 = v6s[rng() % 8];
        if (!v4 && !v6) continue;
        Session s = make(std::int64_t(rng() % 1000000), v4, v6);
        Classification c = classify_session(s, dir);

        REQUIRE((c.category == SessionCategory::NonVpn) == c.provider.empty());
        if (c.unknown_as) REQUIRE(c.category == SessionCategory::DualSafe);
        if (!s.v4) REQUIRE(c.category == SessionCategory::NonVpn);
        if (c.category == SessionCategory::V4OnlyVpn) REQUIRE(!s.v6);
        if (c.category != SessionCategory::NonVpn && c.category != SessionCategory::V4OnlyVpn)
            REQUIRE((s.v4 && s.v6));
    }
}

TEST_CASE("adding prefetch ranges only ever reclassifies toward prefetch") {
    Directory with = make_directory(true);
    Directory without = make_directory(false);
    std::mt19937_64 rng(73);
    const char* v4s[] = {"101.10.0.9", "101.20.0.9", "102.20.0.9", "8.8.8.8", nullptr};
    const char* v6s[] = {"2001:aaaa::9", "2001:bbbb::9", "2001:cccc::9", "2001:dddd::9",
                         "2001:eeee::9", "2001:abcd::9", "2001:9999::9", nullptr};
    for (int i = 0; i < 2000; ++i) {
        const char* v4 = v4s[rng() % 5];
        const char* v6 = v6s[rng() % 8];
        if (!v4 && !v6) continue;
        Session s = make(std::int64_t(rng() % 1000000), v4, v6);
        Classification a = classify_session(s, with);
        Classification b = classify_session(s, without);
        REQUIRE(a.provider == b.provider);
        if (a.category != b.category) {
            REQUIRE(a.category == SessionCategory::DualSafePrefetch);
            REQUIRE(b.category != SessionCategory::NonVpn);
            REQUIRE(b.category != SessionCategory::V4OnlyVpn);
        }
        REQUIRE((a.category != SessionCategory::Leak ||
                 b.category == SessionCategory::Leak));
    }
}
