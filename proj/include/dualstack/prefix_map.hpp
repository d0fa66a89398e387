#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>

#include "dualstack/ip.hpp"

namespace dualstack {

// Longest-prefix-match dictionary: buckets keyed by prefix length,
// scanned longest first.
template <typename T>
class PrefixMap {
public:
    struct Match {
        Prefix prefix;
        const T* value;
    };

    // Returns false (and leaves the map unchanged) if the prefix is
    // already present.
    bool insert(const Prefix& prefix, T value) {
        auto [it, fresh] = by_length_[prefix.length].try_emplace(prefix.base, std::move(value));
        (void)it;
        if (fresh) ++size_;
        return fresh;
    }

    const T* exact(const Prefix& prefix) const {
        auto bucket = by_length_.find(prefix.length);
        if (bucket == by_length_.end()) return nullptr;
        auto it = bucket->second.find(prefix.base);
        return it == bucket->second.end() ? nullptr : &it->second;
    }

    std::optional<Match> lookup(IpBits addr) const {
        for (const auto& [len, bucket] : by_length_) {
            auto it = bucket.find(addr.truncated(len));
            if (it != bucket.end()) return Match{Prefix{it->first, len}, &it->second};
        }
        return std::nullopt;
    }

    std::optional<Match> lookup(const IpAddress& addr) const { return lookup(addr.bits()); }

    bool contains(const IpAddress& addr) const { return lookup(addr.bits()).has_value(); }

    template <typename F>
    void for_each(F&& fn) const {
        for (const auto& [len, bucket] : by_length_)
            for (const auto& [base, value] : bucket) fn(Prefix{base, len}, value);
    }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

private:
    std::map<int, std::map<IpBits, T>, std::greater<int>> by_length_;
    std::size_t size_ = 0;
};

} // namespace dualstack
