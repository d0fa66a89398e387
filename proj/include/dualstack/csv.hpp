#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dualstack/error.hpp"
#include "dualstack/sessions.hpp"

namespace dualstack {

// Shortest round-trip formatting, locale-free.
inline std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Plain comma split; fields must not contain commas or quotes.
inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(pos)));
            return fields;
        }
        fields.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
}

template <typename T>
inline T parse_int(std::string_view s, std::string_view what, std::string_view source, int lineno) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": bad " +
                         std::string(what) + " '" + std::string(s) + "'");
    return value;
}

inline std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return in;
}

} // namespace detail

struct SessionLogStats {
    std::size_t rows = 0;
    std::size_t skipped = 0;
};

// Reads a session log. Header and column order are fixed:
//   timestamp,session_id,v4,v6,preferred
// Empty v4/v6 fields mean the family was not observed. In strict mode a
// malformed row throws; otherwise it is counted and skipped.
inline std::vector<Session> load_session_log(std::istream& in, std::string_view source,
                                             bool strict = false,
                                             SessionLogStats* stats = nullptr) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(std::string(source) + ": empty session log");
    if (detail::trim(line) != "timestamp,session_id,v4,v6,preferred")
        throw ParseError(std::string(source) + ":1: bad header '" + line + "'");

    std::vector<Session> sessions;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto parse_row = [&]() -> Session {
            auto fields = detail::split_fields(line);
            if (fields.size() != 5)
                throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                                 ": expected 5 fields, got " + std::to_string(fields.size()));
            Session s;
            s.timestamp =
                detail::parse_int<std::int64_t>(fields[0], "timestamp", source, lineno);
            if (s.timestamp < 0)
                throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                                 ": negative timestamp");
            s.session_id = std::string(fields[1]);
            auto parse_addr = [&](std::string_view text, Family want) {
                IpAddress addr = IpAddress::parse(text);
                if (addr.family() != want)
                    throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": '" +
                                     std::string(text) + "' is not a " +
                                     std::string(to_string(want)) + " address");
                return addr;
            };
            try {
                if (!fields[2].empty()) s.v4 = parse_addr(fields[2], Family::V4);
                if (!fields[3].empty()) s.v6 = parse_addr(fields[3], Family::V6);
            } catch (const ParseError& e) {
                throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": " +
                                 e.what());
            }
            if (!s.v4 && !s.v6)
                throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                                 ": session has no address");
            if (fields[4] == "v4")
                s.preferred = Family::V4;
            else if (fields[4] == "v6")
                s.preferred = Family::V6;
            else
                throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                                 ": bad preferred field '" + std::string(fields[4]) + "'");
            if ((s.preferred == Family::V4 && !s.v4) || (s.preferred == Family::V6 && !s.v6))
                throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                                 ": preferred family has no address");
            return s;
        };
        if (stats) ++stats->rows;
        try {
            sessions.push_back(parse_row());
        } catch (const ParseError&) {
            if (strict) throw;
            if (stats) ++stats->skipped;
        }
    }
    return sessions;
}

inline std::vector<Session> load_session_log_file(const std::string& path, bool strict = false,
                                                  SessionLogStats* stats = nullptr) {
    auto in = detail::open_or_throw(path);
    return load_session_log(in, path, strict, stats);
}

namespace detail {

// Generic two-column CSV walk with a fixed header.
template <typename F>
inline void read_two_column_csv(std::istream& in, std::string_view source,
                                std::string_view header, F&& row) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != header)
        throw ParseError(std::string(source) + ":1: expected header '" + std::string(header) +
                         "'");
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 2)
            throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                             ": expected 2 fields, got " + std::to_string(fields.size()));
        row(fields[0], fields[1], lineno);
    }
}

} // namespace detail

inline void load_vpn_directory(std::istream& in, std::string_view source, Directory& dir) {
    detail::read_two_column_csv(in, source, "prefix,provider",
                                [&](std::string_view prefix_text, std::string_view provider,
                                    int lineno) {
        Prefix prefix;
        try {
            prefix = Prefix::parse(prefix_text);
        } catch (const ParseError& e) {
            throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (provider.empty())
            throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                             ": empty provider");
        const std::string* existing = dir.vpn.exact(prefix);
        if (existing) {
            if (*existing != provider)
                throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                                 ": prefix " + prefix.str() + " mapped to both '" + *existing +
                                 "' and '" + std::string(provider) + "'");
            return;
        }
        dir.vpn.insert(prefix, std::string(provider));
    });
}

inline void load_as_prefixes(std::istream& in, std::string_view source, Directory& dir) {
    detail::read_two_column_csv(in, source, "prefix,asn",
                                [&](std::string_view prefix_text, std::string_view asn_text,
                                    int lineno) {
        Prefix prefix;
        try {
            prefix = Prefix::parse(prefix_text);
        } catch (const ParseError& e) {
            throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
        }
        auto asn = detail::parse_int<std::uint32_t>(asn_text, "asn", source, lineno);
        const std::uint32_t* existing = dir.as_prefix.exact(prefix);
        if (existing) {
            if (*existing != asn)
                throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                                 ": prefix " + prefix.str() + " mapped to both AS" +
                                 std::to_string(*existing) + " and AS" + std::to_string(asn));
            return;
        }
        dir.as_prefix.insert(prefix, asn);
    });
}

inline void load_as_map(std::istream& in, std::string_view source, std::string_view header,
                        std::map<std::uint32_t, std::string>& out) {
    detail::read_two_column_csv(in, source, header,
                                [&](std::string_view asn_text, std::string_view value,
                                    int lineno) {
        auto asn = detail::parse_int<std::uint32_t>(asn_text, "asn", source, lineno);
        if (value.empty())
            throw ParseError(std::string(source) + ":" + std::to_string(lineno) +
                             ": empty value for AS" + std::to_string(asn));
        auto [it, fresh] = out.try_emplace(asn, std::string(value));
        if (!fresh && it->second != value)
            throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": AS" +
                             std::to_string(asn) + " mapped to both '" + it->second + "' and '" +
                             std::string(value) + "'");
    });
}

// One prefix per line, '#' comments.
inline void load_prefix_list(std::istream& in, std::string_view source, PrefixMap<bool>& out) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (std::size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string_view text = detail::trim(line);
        if (text.empty()) continue;
        try {
            out.insert(Prefix::parse(text), true);
        } catch (const ParseError& e) {
            throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

struct DirectoryPaths {
    std::string vpn;
    std::string as_prefixes;
    std::string orgs;
    std::string categories;
    std::string prefetch; // optional, empty to skip
};

inline Directory load_directory(const DirectoryPaths& paths) {
    Directory dir;
    {
        auto in = detail::open_or_throw(paths.vpn);
        load_vpn_directory(in, paths.vpn, dir);
    }
    {
        auto in = detail::open_or_throw(paths.as_prefixes);
        load_as_prefixes(in, paths.as_prefixes, dir);
    }
    {
        auto in = detail::open_or_throw(paths.orgs);
        load_as_map(in, paths.orgs, "asn,org_id", dir.org_of_asn);
    }
    {
        auto in = detail::open_or_throw(paths.categories);
        load_as_map(in, paths.categories, "asn,category", dir.category_of_asn);
    }
    if (!paths.prefetch.empty()) {
        auto in = detail::open_or_throw(paths.prefetch);
        load_prefix_list(in, paths.prefetch, dir.prefetch);
    }
    dir.finalize();
    return dir;
}

inline std::string session_to_csv_row(const Session& s) {
    std::string out = std::to_string(s.timestamp);
    out += ',';
    out += s.session_id;
    out += ',';
    if (s.v4) out += s.v4->str();
    out += ',';
    if (s.v6) out += s.v6->str();
    out += ',';
    out += to_string(s.preferred);
    return out;
}

} // namespace dualstack
