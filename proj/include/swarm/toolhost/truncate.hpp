#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace swarm::toolhost {

inline constexpr std::size_t kDefaultOutputLimit = 64 * 1024;

struct Truncated {
    std::string text;
    bool truncated = false;
    std::size_t bytes_before = 0;
};

/// Cuts `text` so the result, marker line included, fits in `limit` bytes. The
/// kept prefix ends on a line boundary when one exists, and never splits a UTF-8
/// sequence. `truncated` is set iff `text.size() > limit`.
Truncated truncate_output(std::string_view text, std::size_t limit);

/// Marker line appended to truncated output.
std::string truncation_marker(std::size_t limit, std::size_t original);

/// Largest n <= cut such that text[0, n) does not end inside a UTF-8 sequence.
std::size_t utf8_floor(std::string_view text, std::size_t cut);

}  // namespace swarm::toolhost
