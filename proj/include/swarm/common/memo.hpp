#pragma once

#include "swarm/common/rng.hpp"

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace swarm {

/// Results of a pure function of (key, text), remembered by content. Parsing the
/// same file text over and over is most of the work in a long run. Thread-safe.
template <typename T>
class ContentMemo {
public:
    explicit ContentMemo(std::size_t max_entries = 50000) : max_(max_entries) {}

    template <typename F>
    T get(std::string_view key, std::string_view text, F&& compute) {
        const auto h = hash_string(text) ^ (hash_string(key) * 0x9e3779b97f4a7c15ULL);
        {
            std::lock_guard lock(mutex_);
            auto it = entries_.find(h);
            if (it != entries_.end() && it->second.key == key && it->second.text == text) return it->second.value;
        }
        T value = compute();
        std::lock_guard lock(mutex_);
        if (entries_.size() >= max_) entries_.clear();
        entries_[h] = Entry{std::string(key), std::string(text), value};
        return value;
    }

private:
    struct Entry {
        std::string key;
        std::string text;
        T value;
    };
    std::size_t max_;
    std::mutex mutex_;
    std::unordered_map<std::uint64_t, Entry> entries_;
};

}  // namespace swarm
