#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "dualstack/policy.hpp"
#include "helpers.hpp"

using namespace dualstack;
using Catch::Matchers::ContainsSubstring;

namespace {

// Bit-by-bit containment, independent of Prefix::contains.
bool matches_ref(IpBits addr, IpBits base, int len) {
    for (int i = 0; i < len; ++i) {
        std::uint64_t a = i < 64 ? (addr.hi >> (63 - i)) & 1 : (addr.lo >> (127 - i)) & 1;
        std::uint64_t b = i < 64 ? (base.hi >> (63 - i)) & 1 : (base.lo >> (127 - i)) & 1;
        if (a != b) return false;
    }
    return true;
}

PolicyEntry lookup_ref(const PolicyTable& table, const IpAddress& addr) {
    const PolicyRow* best = nullptr;
    for (const PolicyRow& row : table.rows()) {
        if (!matches_ref(addr.bits(), row.prefix.base, row.prefix.length)) continue;
        if (!best || row.prefix.length > best->prefix.length) best = &row;
    }
    REQUIRE(best != nullptr);
    return {best->label, best->precedence};
}

} // namespace

TEST_CASE("stock table lookups") {
    PolicyTable t = default_policy();
    CHECK(t.lookup(IpAddress::parse("::1")) == PolicyEntry{0, 50});
    CHECK(t.lookup(IpAddress::parse("2001:db8::1")) == PolicyEntry{1, 40});
    CHECK(t.lookup(IpAddress::parse("fe80::1")) == PolicyEntry{1, 40});
    CHECK(t.lookup(IpAddress::parse("192.0.2.1")) == PolicyEntry{4, 35});
    CHECK(t.lookup(IpAddress::parse("2002::1")) == PolicyEntry{2, 30});
    CHECK(t.lookup(IpAddress::parse("2001::1")) == PolicyEntry{5, 5});
    CHECK(t.lookup(IpAddress::parse("fc00::1")) == PolicyEntry{13, 3});
    CHECK(t.lookup(IpAddress::parse("fd00::1")) == PolicyEntry{13, 3});
    CHECK(t.lookup(IpAddress::parse("::2")) == PolicyEntry{3, 1});
    CHECK(t.lookup(IpAddress::parse("fec0::1")) == PolicyEntry{11, 1});
    CHECK(t.lookup(IpAddress::parse("3ffe::1")) == PolicyEntry{12, 1});
}

TEST_CASE("tunnel-local table shadows only fc00::/8") {
    PolicyTable t = tla_policy();
    CHECK(t.lookup(IpAddress::parse("fc00::1")) == PolicyEntry{1, 35});
    CHECK(t.lookup(IpAddress::parse("fcff:ffff::1")) == PolicyEntry{1, 35});
    CHECK(t.lookup(IpAddress::parse("fd00::1")) == PolicyEntry{13, 3});
    CHECK(t.lookup(IpAddress::parse("fdff::1")) == PolicyEntry{13, 3});
    // untouched rows stay put
    CHECK(t.lookup(IpAddress::parse("192.0.2.1")) == PolicyEntry{4, 35});
    CHECK(t.lookup(IpAddress::parse("2001:db8::1")) == PolicyEntry{1, 40});
    CHECK(t.rows().size() == default_policy().rows().size() + 1);
}

TEST_CASE("table construction validates rows") {
    CHECK_THROWS_AS(PolicyTable::from_rows({{Prefix::parse("fc00::/7"), 3, 13}}), ConfigError);

    auto rows = detail::base_policy_rows();
    rows.push_back({Prefix::parse("fc00::/7"), 9, 9});
    CHECK_THROWS_WITH(PolicyTable::from_rows(rows), ContainsSubstring("duplicate"));

    rows = detail::base_policy_rows();
    rows.push_back({Prefix::parse("fc00::/8"), -1, 1});
    CHECK_THROWS_AS(PolicyTable::from_rows(rows), ConfigError);
    rows.back() = {Prefix::parse("fc00::/8"), 1, -1};
    CHECK_THROWS_AS(PolicyTable::from_rows(rows), ConfigError);
}

TEST_CASE("row order does not matter") {
    auto rows = detail::base_policy_rows();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(rows.begin(), rows.end(), rng);
        CHECK(PolicyTable::from_rows(rows) == default_policy());
    }
}

TEST_CASE("config text parses to the stock tables") {
    const char* stock = R"(# stock rules
label ::1/128 0
precedence ::1/128 50
label ::/0 1
precedence ::/0 40
label ::ffff:0:0/96 4
precedence ::ffff:0:0/96 35
label 2002::/16 2
precedence 2002::/16 30
label 2001::/32 5
precedence 2001::/32 5
label fc00::/7 13
precedence fc00::/7 3
label ::/96 3
precedence ::/96 1
label fec0::/10 11
precedence fec0::/10 1
label 3ffe::/16 12
precedence 3ffe::/16 1
)";
    CHECK(parse_policy_config(stock) == default_policy());

    std::string tla = std::string(stock) + "label fc00::/8 1\nprecedence fc00::/8 35\n";
    CHECK(parse_policy_config(tla) == tla_policy());
}

TEST_CASE("config errors carry the source line") {
    CHECK_THROWS_WITH(parse_policy_config("label ::/0 1\nfoo ::/0 2\n", "p.conf"),
                      ContainsSubstring("p.conf:2") && ContainsSubstring("foo"));
    CHECK_THROWS_WITH(parse_policy_config("label ::/0\n"), ContainsSubstring(":1"));
    CHECK_THROWS_WITH(parse_policy_config("label ::/0 1 extra\n"),
                      ContainsSubstring("trailing"));
    CHECK_THROWS_WITH(parse_policy_config("label nonsense 1\n"), ContainsSubstring(":1"));
    CHECK_THROWS_WITH(parse_policy_config("label ::/0 -3\n"), ContainsSubstring("-3"));
    CHECK_THROWS_WITH(parse_policy_config("label ::/0 1\nlabel ::/0 2\n"),
                      ContainsSubstring("duplicate label"));
    CHECK_THROWS_WITH(parse_policy_config("label ::/0 1\n"),
                      ContainsSubstring("no precedence"));
    CHECK_THROWS_WITH(parse_policy_config("precedence ::/0 1\n"), ContainsSubstring("no label"));
    CHECK_THROWS_WITH(parse_policy_config("# only a comment\n"), ContainsSubstring("empty"));
    CHECK_THROWS_AS(parse_policy_config("label fd00::1/8 1\nprecedence fd00::1/8 1\n"),
                    ParseError);
}

TEST_CASE("comments and blank lines are ignored") {
    PolicyTable t = parse_policy_config(
        "\n# heading\nlabel ::/0 7   # inline\n\nprecedence ::/0 9\n");
    REQUIRE(t.rows().size() == 1);
    CHECK(t.lookup(IpAddress::parse("::5")) == PolicyEntry{7, 9});
}

TEST_CASE("serialize then parse is the identity") {
    CHECK(parse_policy_config(serialize_policy_config(default_policy())) == default_policy());
    CHECK(parse_policy_config(serialize_policy_config(tla_policy())) == tla_policy());

    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
        std::vector<PolicyRow> rows{{Prefix::parse("::/0"), int(rng() % 64), int(rng() % 64)}};
        std::set<std::pair<IpBits, int>> used{{IpBits{0, 0}, 0}};
        int extra = 1 + int(rng() % 8);
        for (int j = 0; j < extra; ++j) {
            IpAddress a = testutil::random_address(rng);
            int len = 1 + int(rng() % 128);
            Prefix p{a.bits().truncated(len), len};
            if (!used.insert({p.base, p.length}).second) continue;
            rows.push_back({p, int(rng() % 64), int(rng() % 64)});
        }
        PolicyTable t = PolicyTable::from_rows(rows);
        PolicyTable back = parse_policy_config(serialize_policy_config(t));
        REQUIRE(back == t);
    }
}

TEST_CASE("lookup is the longest matching row") {
    std::mt19937_64 rng(37);
    std::vector<PolicyTable> tables{default_policy(), tla_policy()};
    for (int i = 0; i < 30; ++i) {
        std::vector<PolicyRow> rows{{Prefix::parse("::/0"), int(rng() % 50), int(rng() % 50)}};
        std::set<std::pair<IpBits, int>> used{{IpBits{0, 0}, 0}};
        for (int j = 0; j < 12; ++j) {
            IpAddress a = testutil::random_address(rng);
            int len = 1 + int(rng() % 128);
            Prefix p{a.bits().truncated(len), len};
            if (!used.insert({p.base, p.length}).second) continue;
            rows.push_back({p, int(rng() % 50), int(rng() % 50)});
        }
        tables.push_back(PolicyTable::from_rows(rows));
    }
    for (const PolicyTable& t : tables)
        for (int i = 0; i < 300; ++i) {
            IpAddress a = testutil::random_address(rng);
            REQUIRE(t.lookup(a) == lookup_ref(t, a));
        }
}
