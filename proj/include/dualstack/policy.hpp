#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dualstack/error.hpp"
#include "dualstack/ip.hpp"

namespace dualstack {

struct PolicyEntry {
    int label = 0;
    int precedence = 0;

    friend constexpr bool operator==(const PolicyEntry&, const PolicyEntry&) = default;
};

struct PolicyRow {
    Prefix prefix;
    int precedence = 0;
    int label = 0;

    friend constexpr bool operator==(const PolicyRow&, const PolicyRow&) = default;
};

// Label/precedence table with longest-prefix-match lookup. Rows are kept
// sorted (length descending, base ascending) so two tables with the same
// rows compare equal regardless of construction order.
class PolicyTable {
public:
    static PolicyTable from_rows(std::vector<PolicyRow> rows) {
        std::sort(rows.begin(), rows.end(), [](const PolicyRow& a, const PolicyRow& b) {
            if (a.prefix.length != b.prefix.length) return a.prefix.length > b.prefix.length;
            return a.prefix.base < b.prefix.base;
        });
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const PolicyRow& row = rows[i];
            if (row.label < 0 || row.precedence < 0)
                throw ConfigError("policy row " + row.prefix.str() +
                                  ": label and precedence must be non-negative");
            if (i > 0 && rows[i - 1].prefix == row.prefix)
                throw ConfigError("duplicate policy prefix " + row.prefix.str());
        }
        bool has_default = std::any_of(rows.begin(), rows.end(), [](const PolicyRow& r) {
            return r.prefix.length == 0;
        });
        if (!has_default)
            throw ConfigError("policy table has no ::/0 row");
        PolicyTable t;
        t.rows_ = std::move(rows);
        return t;
    }

    const std::vector<PolicyRow>& rows() const { return rows_; }

    PolicyEntry lookup(const IpAddress& addr) const {
        for (const PolicyRow& row : rows_)
            if (row.prefix.contains(addr)) return {row.label, row.precedence};
        throw std::logic_error("policy lookup fell through the ::/0 row");
    }

    friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

private:
    std::vector<PolicyRow> rows_;
};

namespace detail {

inline std::vector<PolicyRow> base_policy_rows() {
    return {
        {Prefix::parse("::1/128"), 50, 0},
        {Prefix::parse("::/0"), 40, 1},
        {Prefix::parse("::ffff:0:0/96"), 35, 4},
        {Prefix::parse("2002::/16"), 30, 2},
        {Prefix::parse("2001::/32"), 5, 5},
        {Prefix::parse("fc00::/7"), 3, 13},
        {Prefix::parse("::/96"), 1, 3},
        {Prefix::parse("fec0::/10"), 1, 11},
        {Prefix::parse("3ffe::/16"), 1, 12},
    };
}

} // namespace detail

// The stock table from RFC 6724 section 2.1.
inline PolicyTable default_policy() {
    return PolicyTable::from_rows(detail::base_policy_rows());
}

// Stock table plus a tunnel-local row: fc00::/8 shadows the fc00::/7 ULA
// row via longest match and lines its label up with ::/0.
inline PolicyTable tla_policy() {
    auto rows = detail::base_policy_rows();
    rows.push_back({Prefix::parse("fc00::/8"), 35, 1});
    return PolicyTable::from_rows(rows);
}

// gai.conf-style config: "label <prefix> <int>" and "precedence <prefix>
// <int>" lines, '#' comments. Every prefix must appear under both
// keywords.
inline PolicyTable parse_policy_config(std::string_view text,
                                       std::string_view source_name = "<policy>") {
    struct Partial {
        std::optional<int> label;
        std::optional<int> precedence;
        int order;
    };
    std::vector<std::pair<Prefix, Partial>> seen;
    auto find = [&](const Prefix& p) -> Partial* {
        for (auto& [prefix, partial] : seen)
            if (prefix == p) return &partial;
        return nullptr;
    };

    auto fail = [&](int lineno, const std::string& what) -> void {
        throw ParseError(std::string(source_name) + ":" + std::to_string(lineno) + ": " + what);
    };

    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    int order = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (std::size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string keyword, prefix_text, value_text, extra;
        if (!(fields >> keyword)) continue;
        if (keyword != "label" && keyword != "precedence")
            fail(lineno, "unknown keyword '" + keyword + "'");
        if (!(fields >> prefix_text >> value_text))
            fail(lineno, "expected '" + keyword + " <prefix> <value>'");
        if (fields >> extra)
            fail(lineno, "trailing tokens after '" + keyword + "' entry");
        Prefix prefix;
        try {
            prefix = Prefix::parse(prefix_text);
        } catch (const ParseError& e) {
            fail(lineno, e.what());
        }
        int value = 0;
        auto [ptr, ec] =
            std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
        if (ec != std::errc() || ptr != value_text.data() + value_text.size() || value < 0)
            fail(lineno, "bad " + keyword + " value '" + value_text + "'");
        Partial* partial = find(prefix);
        if (!partial) {
            seen.push_back({prefix, Partial{{}, {}, order++}});
            partial = &seen.back().second;
        }
        auto& slot = keyword == "label" ? partial->label : partial->precedence;
        if (slot.has_value())
            fail(lineno, "duplicate " + keyword + " for prefix " + prefix.str());
        slot = value;
    }

    std::vector<PolicyRow> rows;
    for (const auto& [prefix, partial] : seen) {
        if (!partial.label.has_value())
            throw ParseError(std::string(source_name) + ": prefix " + prefix.str() +
                             " has a precedence but no label");
        if (!partial.precedence.has_value())
            throw ParseError(std::string(source_name) + ": prefix " + prefix.str() +
                             " has a label but no precedence");
        rows.push_back({prefix, *partial.precedence, *partial.label});
    }
    if (rows.empty())
        throw ParseError(std::string(source_name) + ": empty policy config");
    return PolicyTable::from_rows(std::move(rows));
}

inline PolicyTable load_policy_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open policy file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_policy_config(buf.str(), path);
}

inline std::string serialize_policy_config(const PolicyTable& table) {
    std::string out;
    for (const PolicyRow& row : table.rows()) {
        out += "precedence " + row.prefix.str() + " " + std::to_string(row.precedence) + "\n";
        out += "label " + row.prefix.str() + " " + std::to_string(row.label) + "\n";
    }
    return out;
}

} // namespace dualstack
