#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace swarm::vcs {

/// Snapshot of a file tree: path -> full text content.
using Tree = std::map<std::string, std::string>;

/// A contiguous change: `old_lines` at `old_start` in the source are replaced by
/// `new_lines`, which start at `new_start` in the target. Lines keep their '\n'.
struct Hunk {
    std::size_t old_start = 0;
    std::vector<std::string> old_lines;
    std::size_t new_start = 0;
    std::vector<std::string> new_lines;

    std::size_t old_end() const { return old_start + old_lines.size(); }
    bool operator==(const Hunk&) const = default;
};

struct FileDiff {
    std::string path;
    bool old_exists = false;
    bool new_exists = false;
    std::vector<Hunk> hunks;

    std::int64_t added() const;
    std::int64_t removed() const;
    bool operator==(const FileDiff&) const = default;
};

enum class PathClass { code, coordination };

/// Paths ending in `.toy` are code; everything else (issue files, reports) is coordination.
PathClass classify_path(std::string_view path);

struct DiffStat {
    std::int64_t added = 0;
    std::int64_t removed = 0;
    std::int64_t code_files = 0;
    std::int64_t coordination_files = 0;
    std::int64_t code_net = 0;
    std::int64_t coordination_net = 0;

    bool operator==(const DiffStat&) const = default;
};

struct Diff {
    std::vector<FileDiff> files;  // sorted by path
    std::int64_t added_lines = 0;
    std::int64_t removed_lines = 0;
    std::vector<std::string> code_paths;
    std::vector<std::string> coordination_paths;

    bool empty() const { return files.empty(); }
    DiffStat stat() const;
};

/// Splits text into lines, each keeping its terminating '\n'; a final line
/// without a terminator is kept as is. Joining the result gives back `text`.
std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines);

/// Minimal line edit script (Myers) grouped into hunks.
std::vector<Hunk> diff_lines(const std::vector<std::string>& from, const std::vector<std::string>& to);

Diff diff_trees(const Tree& from, const Tree& to);

/// Applies `diff` to `base`. Throws Error(invalid_argument) if the diff does not
/// match the base content.
Tree apply_diff(const Diff& diff, const Tree& base);

struct MergeConflict {
    std::string path;
    std::vector<Hunk> ours;
    std::vector<Hunk> theirs;
};

struct MergeResult {
    bool clean = true;
    Tree tree;
    std::vector<MergeConflict> conflicts;
};

/// Line-based three-way merge. Changes whose base ranges overlap or touch
/// (distance 0) conflict unless they are identical.
MergeResult merge_trees(const Tree& base, const Tree& ours, const Tree& theirs);

}  // namespace swarm::vcs
