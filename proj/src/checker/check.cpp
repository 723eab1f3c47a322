#include "swarm/checker/check.hpp"

#include "swarm/common/memo.hpp"

#include "swarm/common/error.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace swarm::checker {
namespace {

constexpr const char* kSnippetPath = "<snippet>.toy";

void finish(CheckReport& report) {
    std::sort(report.errors.begin(), report.errors.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.path, a.line, a.message) < std::tie(b.path, b.line, b.message);
    });
    report.ok = report.errors.empty();
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string strip(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

const ToyDecl* Analysis::find(std::string_view name) const {
    auto it = decls.find(std::string(name));
    return it == decls.end() ? nullptr : &it->second.decl;
}

bool Analysis::proved(std::string_view name) const {
    const auto* d = find(name);
    return d && d->body == Body::proved;
}

bool Analysis::solvable(std::string_view name) const {
    const auto* d = find(name);
    if (!d || !d->sorry() || d->assumed()) return false;
    for (const auto& dep : d->deps) {
        const auto* dd = find(dep);
        if (!dd || !dd->complete()) return false;
    }
    return true;
}

std::set<std::string> Analysis::open_closure(std::string_view name) const {
    std::set<std::string> seen;
    std::set<std::string> open;
    std::vector<std::string> stack{std::string(name)};
    while (!stack.empty()) {
        auto cur = std::move(stack.back());
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        const auto* d = find(cur);
        if (!d || d->complete()) continue;
        open.insert(cur);
        for (const auto& dep : d->deps) stack.push_back(dep);
    }
    return open;
}

std::set<std::string> Analysis::root_blockers(std::string_view name) const {
    std::set<std::string> roots;
    for (const auto& n : open_closure(name)) {
        if (solvable(n)) roots.insert(n);
    }
    return roots;
}

std::set<std::string> Analysis::transitive_imports(const std::string& path) const {
    std::set<std::string> seen;
    std::vector<std::string> stack;
    if (auto it = files.find(path); it != files.end()) stack = it->second.imports;
    while (!stack.empty()) {
        auto cur = std::move(stack.back());
        stack.pop_back();
        if (cur == path || !seen.insert(cur).second) continue;
        if (auto it = files.find(cur); it != files.end()) {
            stack.insert(stack.end(), it->second.imports.begin(), it->second.imports.end());
        }
    }
    return seen;
}

Analysis analyze(const vcs::Tree& tree) {
    Analysis a;
    auto& report = a.report;
    for (const auto& [path, content] : tree) {
        if (!is_toy_path(path)) continue;
        static ContentMemo<ToyFile> memo;
        auto file = memo.get(path, content, [&] { return parse_toy_file(path, content); });
        report.errors.insert(report.errors.end(), file.errors.begin(), file.errors.end());
        a.files.emplace(path, std::move(file));
    }

    // Imports must resolve, and the import graph must be acyclic.
    std::map<std::string, std::size_t> indegree;
    std::map<std::string, std::vector<std::string>> importers;
    for (const auto& [path, file] : a.files) {
        indegree.try_emplace(path, 0);
        std::set<std::string> distinct;
        for (const auto& imp : file.imports) {
            if (!a.files.count(imp)) {
                report.errors.push_back({path, 0, "unresolved import '" + imp + "'"});
                continue;
            }
            if (distinct.insert(imp).second) {
                ++indegree[path];
                importers[imp].push_back(path);
            }
        }
    }
    std::deque<std::string> ready;
    for (const auto& [path, deg] : indegree) {
        if (deg == 0) ready.push_back(path);
    }
    while (!ready.empty()) {
        auto cur = ready.front();
        ready.pop_front();
        for (const auto& next : importers[cur]) {
            if (--indegree[next] == 0) ready.push_back(next);
        }
    }
    for (const auto& [path, deg] : indegree) {
        if (deg > 0) report.errors.push_back({path, 0, "import cycle through '" + path + "'"});
    }

    for (const auto& [path, file] : a.files) {
        for (const auto& d : file.decls) {
            ++report.decl_count;
            if (d.sorry()) ++report.sorry_count;
            report.decl_names.insert(d.name);
            auto [it, inserted] = a.decls.try_emplace(d.name, LocatedDecl{path, d});
            if (!inserted) {
                report.errors.push_back(
                    {path, d.line, "duplicate name '" + d.name + "' (first defined in " + it->second.path + ")"});
            }
        }
    }

    for (const auto& [path, file] : a.files) {
        const auto visible_files = a.transitive_imports(path);
        for (const auto& d : file.decls) {
            for (const auto& dep : d.deps) {
                auto it = a.decls.find(dep);
                if (it == a.decls.end()) {
                    report.errors.push_back({path, d.line, "unknown name '" + dep + "'"});
                    continue;
                }
                const auto& where = it->second;
                const bool visible = where.path == path ? where.decl.line < d.line : visible_files.count(where.path) > 0;
                if (!visible) {
                    report.errors.push_back({path, d.line, "'" + dep + "' used before its definition"});
                }
            }
        }
    }
    finish(report);
    return a;
}

CheckReport check(const vcs::Tree& tree) { return analyze(tree).report; }

CheckReport check_snippet(const vcs::Tree& tree, std::string_view snippet) {
    vcs::Tree scratch;
    std::string header;
    std::size_t offset = 0;
    for (const auto& [path, content] : tree) {
        if (!is_toy_path(path)) continue;
        scratch.emplace(path, content);
        header += "import " + path + "\n";
        ++offset;
    }
    scratch[kSnippetPath] = header + std::string(snippet);
    auto full = analyze(scratch);

    CheckReport out;
    for (auto& e : full.report.errors) {
        if (e.path != kSnippetPath) continue;
        e.path = "<snippet>";
        if (e.line > offset) e.line -= offset;
        out.errors.push_back(std::move(e));
    }
    const auto& file = full.files.at(kSnippetPath);
    std::map<std::string, std::string> repo_names;
    for (const auto& [path, f] : full.files) {
        if (path == kSnippetPath) continue;
        for (const auto& d : f.decls) repo_names.try_emplace(d.name, path);
    }
    for (const auto& d : file.decls) {
        if (auto it = repo_names.find(d.name); it != repo_names.end()) {
            out.errors.push_back(
                {"<snippet>", d.line - offset, "duplicate name '" + d.name + "' (defined in " + it->second + ")"});
        }
        ++out.decl_count;
        if (d.sorry()) ++out.sorry_count;
        out.decl_names.insert(d.name);
    }
    finish(out);
    return out;
}

std::string_view target_status_name(TargetStatus s) {
    switch (s) {
        case TargetStatus::missing: return "missing";
        case TargetStatus::stated: return "stated";
        case TargetStatus::proved: return "proved";
        case TargetStatus::excluded: return "excluded";
    }
    return "?";
}

std::vector<TargetSpec> parse_target_list(std::string_view text) {
    std::vector<TargetSpec> out;
    std::set<std::string> names;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(line);
        if (line.empty() || line.front() == '#') continue;
        auto fields = split(line, ',');
        if (fields.size() < 3 || fields.size() > 4) {
            throw Error(Errc::parse_error, "target list line " + std::to_string(line_no) + ": expected 3 or 4 fields");
        }
        TargetSpec t;
        t.name = strip(fields[0]);
        t.chapter = strip(fields[1]);
        t.kind = strip(fields[2]);
        if (!is_identifier(t.name)) {
            throw Error(Errc::parse_error, "target list line " + std::to_string(line_no) + ": bad name");
        }
        if (fields.size() == 4) {
            for (const auto& raw : split(fields[3], '|')) {
                auto m = strip(raw);
                if (m.empty()) continue;
                if (m == "cited") {
                    t.cited = true;
                } else if (m == "exercise") {
                    t.exercise = true;
                } else {
                    throw Error(Errc::parse_error,
                                "target list line " + std::to_string(line_no) + ": unknown marker '" + m + "'");
                }
            }
        }
        if (!names.insert(t.name).second) {
            throw Error(Errc::parse_error, "target list line " + std::to_string(line_no) + ": duplicate target");
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::string format_target_list(const std::vector<TargetSpec>& targets) {
    std::string out;
    for (const auto& t : targets) {
        out += t.name + "," + t.chapter + "," + t.kind + ",";
        if (t.cited) out += "cited";
        if (t.cited && t.exercise) out += "|";
        if (t.exercise) out += "exercise";
        out += "\n";
    }
    return out;
}

std::map<std::string, TargetStatus> target_status(const Analysis& analysis, const std::vector<TargetSpec>& targets) {
    std::map<std::string, TargetStatus> out;
    for (const auto& t : targets) {
        TargetStatus s = TargetStatus::missing;
        if (t.excluded()) {
            s = TargetStatus::excluded;
        } else if (const auto* d = analysis.find(t.name)) {
            s = d->sorry() ? TargetStatus::stated : TargetStatus::proved;
        }
        out[t.name] = s;
    }
    return out;
}

TargetSummary summarize(const std::map<std::string, TargetStatus>& statuses) {
    TargetSummary s;
    for (const auto& [_, st] : statuses) {
        ++s.total;
        switch (st) {
            case TargetStatus::excluded: ++s.excluded; break;
            case TargetStatus::proved: ++s.proved; break;
            case TargetStatus::stated: ++s.stated; break;
            case TargetStatus::missing: ++s.missing; break;
        }
    }
    s.obligations = s.total - s.excluded;
    return s;
}

CheckReport LeanAdapter::build(const vcs::Tree&) const {
    throw Error(Errc::unimplemented, "lean build backend is not available");
}

CheckReport LeanAdapter::snippet(const vcs::Tree&, std::string_view) const {
    throw Error(Errc::unimplemented, "lean snippet backend is not available");
}

}  // namespace swarm::checker
