#include "swarm/vcs/diff.hpp"

#include "swarm/common/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace swarm::vcs {

std::int64_t FileDiff::added() const {
    std::int64_t n = 0;
    for (const auto& h : hunks) n += static_cast<std::int64_t>(h.new_lines.size());
    return n;
}

std::int64_t FileDiff::removed() const {
    std::int64_t n = 0;
    for (const auto& h : hunks) n += static_cast<std::int64_t>(h.old_lines.size());
    return n;
}

PathClass classify_path(std::string_view path) {
    constexpr std::string_view ext = ".toy";
    if (path.size() >= ext.size() && path.substr(path.size() - ext.size()) == ext) return PathClass::code;
    return PathClass::coordination;
}

DiffStat Diff::stat() const {
    DiffStat s;
    s.added = added_lines;
    s.removed = removed_lines;
    for (const auto& f : files) {
        const auto net = f.added() - f.removed();
        if (classify_path(f.path) == PathClass::code) {
            ++s.code_files;
            s.code_net += net;
        } else {
            ++s.coordination_files;
            s.coordination_net += net;
        }
    }
    return s;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start + 1));
        start = nl + 1;
    }
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::size_t total = 0;
    for (const auto& l : lines) total += l.size();
    std::string out;
    out.reserve(total);
    for (const auto& l : lines) out += l;
    return out;
}

namespace {

enum class Op : unsigned char { keep, del, ins };

// Myers' O((N+M)D) shortest edit script over interned line ids.
std::vector<Op> edit_script(const std::vector<int>& a, const std::vector<int>& b) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const int max = n + m;
    std::vector<Op> ops;
    if (max == 0) return ops;

    const int offset = max + 1;
    std::vector<int> v(2 * max + 3, 0);
    std::vector<std::vector<int>> trace;
    int final_d = -1;
    for (int d = 0; d <= max; ++d) {
        trace.push_back(v);
        for (int k = -d; k <= d; k += 2) {
            int x = 0;
            if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
                x = v[offset + k + 1];
            } else {
                x = v[offset + k - 1] + 1;
            }
            int y = x - k;
            while (x < n && y < m && a[x] == b[y]) {
                ++x;
                ++y;
            }
            v[offset + k] = x;
            if (x >= n && y >= m) {
                final_d = d;
                break;
            }
        }
        if (final_d >= 0) break;
    }

    int x = n;
    int y = m;
    for (int d = final_d; d > 0; --d) {
        const auto& vd = trace[d];
        const int k = x - y;
        int prev_k = 0;
        if (k == -d || (k != d && vd[offset + k - 1] < vd[offset + k + 1])) {
            prev_k = k + 1;
        } else {
            prev_k = k - 1;
        }
        const int prev_x = vd[offset + prev_k];
        const int prev_y = prev_x - prev_k;
        while (x > prev_x && y > prev_y) {
            ops.push_back(Op::keep);
            --x;
            --y;
        }
        if (x == prev_x) {
            ops.push_back(Op::ins);
            --y;
        } else {
            ops.push_back(Op::del);
            --x;
        }
    }
    while (x > 0 && y > 0) {
        ops.push_back(Op::keep);
        --x;
        --y;
    }
    std::reverse(ops.begin(), ops.end());
    return ops;
}

}  // namespace

std::vector<Hunk> diff_lines(const std::vector<std::string>& from, const std::vector<std::string>& to) {
    std::unordered_map<std::string_view, int> intern;
    auto ids = [&](const std::vector<std::string>& lines) {
        std::vector<int> out;
        out.reserve(lines.size());
        for (const auto& l : lines) {
            auto [it, inserted] = intern.try_emplace(l, static_cast<int>(intern.size()));
            out.push_back(it->second);
        }
        return out;
    };
    const auto a = ids(from);
    const auto b = ids(to);

    std::vector<Hunk> hunks;
    std::size_t i = 0;
    std::size_t j = 0;
    Hunk* open = nullptr;
    for (Op op : edit_script(a, b)) {
        if (op == Op::keep) {
            open = nullptr;
            ++i;
            ++j;
            continue;
        }
        if (!open) {
            hunks.push_back(Hunk{i, {}, j, {}});
            open = &hunks.back();
        }
        if (op == Op::del) {
            open->old_lines.push_back(from[i++]);
        } else {
            open->new_lines.push_back(to[j++]);
        }
    }
    return hunks;
}

Diff diff_trees(const Tree& from, const Tree& to) {
    Diff diff;
    auto emit = [&](const std::string& path, const std::string* old_text, const std::string* new_text) {
        FileDiff fd;
        fd.path = path;
        fd.old_exists = old_text != nullptr;
        fd.new_exists = new_text != nullptr;
        fd.hunks = diff_lines(old_text ? split_lines(*old_text) : std::vector<std::string>{},
                              new_text ? split_lines(*new_text) : std::vector<std::string>{});
        diff.added_lines += fd.added();
        diff.removed_lines += fd.removed();
        (classify_path(path) == PathClass::code ? diff.code_paths : diff.coordination_paths).push_back(path);
        diff.files.push_back(std::move(fd));
    };

    auto a = from.begin();
    auto b = to.begin();
    while (a != from.end() || b != to.end()) {
        if (b == to.end() || (a != from.end() && a->first < b->first)) {
            emit(a->first, &a->second, nullptr);
            ++a;
        } else if (a == from.end() || b->first < a->first) {
            emit(b->first, nullptr, &b->second);
            ++b;
        } else {
            if (a->second != b->second) emit(a->first, &a->second, &b->second);
            ++a;
            ++b;
        }
    }
    return diff;
}

namespace {

std::vector<std::string> apply_hunks(const std::vector<std::string>& base, const std::vector<Hunk>& hunks,
                                     const std::string& path) {
    std::vector<std::string> out;
    out.reserve(base.size());
    std::size_t cursor = 0;
    for (const auto& h : hunks) {
        if (h.old_start < cursor || h.old_end() > base.size()) {
            throw Error(Errc::invalid_argument, "hunk out of range in " + path);
        }
        out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(cursor),
                   base.begin() + static_cast<std::ptrdiff_t>(h.old_start));
        for (std::size_t k = 0; k < h.old_lines.size(); ++k) {
            if (base[h.old_start + k] != h.old_lines[k]) {
                throw Error(Errc::invalid_argument, "hunk does not match base content in " + path);
            }
        }
        out.insert(out.end(), h.new_lines.begin(), h.new_lines.end());
        cursor = h.old_end();
    }
    out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(cursor), base.end());
    return out;
}

}  // namespace

Tree apply_diff(const Diff& diff, const Tree& base) {
    Tree out = base;
    for (const auto& fd : diff.files) {
        auto it = out.find(fd.path);
        if (fd.old_exists != (it != out.end())) {
            throw Error(Errc::invalid_argument, "existence mismatch applying diff to " + fd.path);
        }
        const auto old_lines = fd.old_exists ? split_lines(it->second) : std::vector<std::string>{};
        auto new_lines = apply_hunks(old_lines, fd.hunks, fd.path);
        if (fd.new_exists) {
            out[fd.path] = join_lines(new_lines);
        } else {
            if (!new_lines.empty()) throw Error(Errc::invalid_argument, "deleted file keeps lines: " + fd.path);
            out.erase(fd.path);
        }
    }
    return out;
}

namespace {

bool touches(const Hunk& a, const Hunk& b) { return a.old_start <= b.old_end() && b.old_start <= a.old_end(); }

struct FileMerge {
    bool clean = true;
    std::vector<std::string> lines;
    std::vector<Hunk> ours;
    std::vector<Hunk> theirs;
};

FileMerge merge_lines(const std::vector<std::string>& base, const std::vector<std::string>& ours,
                      const std::vector<std::string>& theirs) {
    auto mine = diff_lines(base, ours);
    auto other = diff_lines(base, theirs);

    // Identical changes on both sides are taken once.
    std::vector<bool> other_dup(other.size(), false);
    for (const auto& h : mine) {
        for (std::size_t k = 0; k < other.size(); ++k) {
            if (!other_dup[k] && other[k].old_start == h.old_start && other[k].old_lines == h.old_lines &&
                other[k].new_lines == h.new_lines) {
                other_dup[k] = true;
                break;
            }
        }
    }

    FileMerge result;
    std::vector<bool> mine_conflict(mine.size(), false);
    std::vector<bool> other_conflict(other.size(), false);
    for (std::size_t i = 0; i < mine.size(); ++i) {
        for (std::size_t k = 0; k < other.size(); ++k) {
            if (other_dup[k]) continue;
            if (touches(mine[i], other[k])) {
                mine_conflict[i] = true;
                other_conflict[k] = true;
            }
        }
    }
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine_conflict[i]) result.ours.push_back(mine[i]);
    }
    for (std::size_t k = 0; k < other.size(); ++k) {
        if (other_conflict[k]) result.theirs.push_back(other[k]);
    }
    if (!result.ours.empty()) {
        result.clean = false;
        return result;
    }

    std::vector<Hunk> all = mine;
    for (std::size_t k = 0; k < other.size(); ++k) {
        if (!other_dup[k]) all.push_back(other[k]);
    }
    std::stable_sort(all.begin(), all.end(), [](const Hunk& a, const Hunk& b) { return a.old_start < b.old_start; });
    result.lines = apply_hunks(base, all, "");
    return result;
}

}  // namespace

MergeResult merge_trees(const Tree& base, const Tree& ours, const Tree& theirs) {
    MergeResult result;
    std::vector<std::string> paths;
    for (const auto* t : {&base, &ours, &theirs}) {
        for (const auto& [p, _] : *t) paths.push_back(p);
    }
    std::sort(paths.begin(), paths.end());
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());

    auto lookup = [](const Tree& t, const std::string& p) -> const std::string* {
        auto it = t.find(p);
        return it == t.end() ? nullptr : &it->second;
    };
    auto same = [](const std::string* a, const std::string* b) {
        if (!a || !b) return a == b;
        return *a == *b;
    };

    for (const auto& path : paths) {
        const auto* b = lookup(base, path);
        const auto* o = lookup(ours, path);
        const auto* t = lookup(theirs, path);
        const std::string* chosen = nullptr;
        bool decided = false;
        if (same(o, t)) {
            chosen = o;
            decided = true;
        } else if (same(b, o)) {
            chosen = t;
            decided = true;
        } else if (same(b, t)) {
            chosen = o;
            decided = true;
        }
        if (decided) {
            if (chosen) result.tree[path] = *chosen;
            continue;
        }
        // Both sides changed the file differently.
        if (!b || !o || !t) {
            MergeConflict c;
            c.path = path;
            const auto base_lines = b ? split_lines(*b) : std::vector<std::string>{};
            c.ours = diff_lines(base_lines, o ? split_lines(*o) : std::vector<std::string>{});
            c.theirs = diff_lines(base_lines, t ? split_lines(*t) : std::vector<std::string>{});
            result.conflicts.push_back(std::move(c));
            result.clean = false;
            continue;
        }
        auto fm = merge_lines(split_lines(*b), split_lines(*o), split_lines(*t));
        if (!fm.clean) {
            result.conflicts.push_back(MergeConflict{path, std::move(fm.ours), std::move(fm.theirs)});
            result.clean = false;
            continue;
        }
        result.tree[path] = join_lines(fm.lines);
    }
    if (!result.clean) result.tree.clear();
    return result;
}

}  // namespace swarm::vcs
