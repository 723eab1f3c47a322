#include "swarm/issues/issue.hpp"

#include "swarm/common/memo.hpp"

#include "swarm/common/error.hpp"
#include "swarm/common/hash.hpp"

#include <array>

namespace swarm::issues {
namespace {

constexpr std::array<std::string_view, 7> kKeys = {"id",         "title",       "status", "kind",
                                                    "created_by", "resolved_by", "subject"};

std::string one_line(std::string s) {
    for (auto& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

std::string_view next_line(std::string_view& rest) {
    auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    return line;
}

bool is_uuid(std::string_view s) {
    if (s.size() != 36) return false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool dash = i == 8 || i == 13 || i == 18 || i == 23;
        if (dash != (s[i] == '-')) return false;
        if (!dash && !std::isxdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

}  // namespace

std::string_view status_name(IssueStatus s) { return s == IssueStatus::open ? "open" : "resolved"; }

std::string_view kind_name(IssueKind k) {
    switch (k) {
        case IssueKind::proving_task: return "proving-task";
        case IssueKind::blocker: return "blocker";
        case IssueKind::refactor: return "refactor";
        case IssueKind::global: return "global";
        case IssueKind::report: return "report";
    }
    return "?";
}

std::optional<IssueStatus> parse_status(std::string_view s) {
    if (s == "open") return IssueStatus::open;
    if (s == "resolved") return IssueStatus::resolved;
    return std::nullopt;
}

std::optional<IssueKind> parse_kind(std::string_view s) {
    for (auto k : {IssueKind::proving_task, IssueKind::blocker, IssueKind::refactor, IssueKind::global,
                   IssueKind::report}) {
        if (kind_name(k) == s) return k;
    }
    return std::nullopt;
}

std::string format_issue(const Issue& issue) {
    std::string out = "---\n";
    out += "id: " + issue.id + "\n";
    out += "title: " + one_line(issue.title) + "\n";
    out += "status: " + std::string(status_name(issue.status)) + "\n";
    out += "kind: " + std::string(kind_name(issue.kind)) + "\n";
    out += "created_by: " + issue.created_by.str() + "\n";
    out += "resolved_by: " + (issue.resolved_by ? issue.resolved_by->str() : std::string()) + "\n";
    out += "subject: " + one_line(issue.subject) + "\n";
    out += "---\n";
    out += issue.body;
    return out;
}

Issue parse_issue(std::string_view text) {
    auto fail = [](const std::string& why) { return Error(Errc::parse_error, "issue: " + why); };
    std::string_view rest = text;
    if (next_line(rest) != "---") throw fail("missing header start");
    std::array<std::string, kKeys.size()> values;
    for (std::size_t i = 0; i < kKeys.size(); ++i) {
        auto line = next_line(rest);
        const auto colon = line.find(':');
        if (colon == std::string_view::npos || line.substr(0, colon) != kKeys[i]) {
            throw fail("expected key '" + std::string(kKeys[i]) + "'");
        }
        auto value = line.substr(colon + 1);
        if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
        values[i] = std::string(value);
    }
    if (next_line(rest) != "---") throw fail("missing header end");

    Issue issue;
    issue.id = values[0];
    if (!is_uuid(issue.id)) throw fail("malformed id '" + issue.id + "'");
    issue.title = values[1];
    auto status = parse_status(values[2]);
    if (!status) throw fail("unknown status '" + values[2] + "'");
    issue.status = *status;
    auto kind = parse_kind(values[3]);
    if (!kind) throw fail("unknown kind '" + values[3] + "'");
    issue.kind = *kind;
    try {
        issue.created_by = parse_agent_id(values[4]);
        if (!values[5].empty()) issue.resolved_by = parse_pr_id(values[5]);
    } catch (const Error& e) {
        throw fail(e.what());
    }
    if (issue.status == IssueStatus::resolved && !issue.resolved_by) throw fail("resolved without resolved_by");
    if (issue.status == IssueStatus::open && issue.resolved_by) throw fail("open issue with resolved_by");
    issue.subject = values[6];
    issue.body = std::string(rest);
    return issue;
}

bool TrackerConfig::owns(std::string_view path) const {
    return path.starts_with(dir) && path.ends_with(".md") && path.find('/', dir.size()) == std::string_view::npos;
}

std::string make_uuid(std::uint64_t seed, AgentId agent, std::uint64_t counter) {
    auto h = sha256_hex("issue:" + std::to_string(seed) + ":" + std::to_string(agent.value) + ":" +
                        std::to_string(counter));
    // Version nibble 4, variant bits 10xx.
    h[12] = '4';
    static constexpr char kVariant[] = "89ab";
    h[16] = kVariant[std::stoi(h.substr(16, 1), nullptr, 16) & 3];
    return h.substr(0, 8) + "-" + h.substr(8, 4) + "-" + h.substr(12, 4) + "-" + h.substr(16, 4) + "-" +
           h.substr(20, 12);
}

std::string IdSource::next(AgentId agent) { return make_uuid(seed_, agent, counters_[agent.value]++); }

std::vector<const Issue*> IssueSet::filter(std::optional<IssueStatus> status, std::optional<IssueKind> kind) const {
    std::vector<const Issue*> out;
    for (const auto& [_, issue] : by_id) {
        if (status && issue.status != *status) continue;
        if (kind && issue.kind != *kind) continue;
        out.push_back(&issue);
    }
    return out;
}

std::vector<const Issue*> IssueSet::open_about(std::string_view subject, std::optional<IssueKind> kind) const {
    std::vector<const Issue*> out;
    for (const auto& [_, issue] : by_id) {
        if (issue.open() && issue.subject == subject && (!kind || issue.kind == *kind)) out.push_back(&issue);
    }
    return out;
}

IssueSet load_issues(const vcs::Tree& tree, const TrackerConfig& config) {
    IssueSet set;
    for (auto it = tree.lower_bound(config.dir); it != tree.end() && it->first.starts_with(config.dir); ++it) {
        if (!config.owns(it->first)) continue;
        struct Parsed {
            std::optional<Issue> issue;
            std::string error;
        };
        static ContentMemo<Parsed> memo;
        auto parsed = memo.get("", it->second, [&] {
            try {
                return Parsed{parse_issue(it->second), {}};
            } catch (const Error& e) {
                return Parsed{std::nullopt, e.what()};
            }
        });
        if (!parsed.issue) {
            set.errors.push_back({it->first, 0, parsed.error});
            continue;
        }
        if (config.path_for(parsed.issue->id) != it->first) {
            set.errors.push_back({it->first, 2, "file name does not match id"});
            continue;
        }
        set.by_id.emplace(parsed.issue->id, std::move(*parsed.issue));
    }
    return set;
}

std::pair<Issue, FileWrite> create_issue(const vcs::Tree& tree, IdSource& ids, AgentId author, NewIssue spec,
                                         const TrackerConfig& config) {
    Issue issue;
    do {
        issue.id = ids.next(author);
    } while (tree.count(config.path_for(issue.id)));
    issue.title = one_line(std::move(spec.title));
    issue.kind = spec.kind;
    issue.created_by = author;
    issue.subject = one_line(std::move(spec.subject));
    issue.body = std::move(spec.body);
    if (!issue.body.empty() && issue.body.back() != '\n') issue.body += '\n';
    FileWrite w{config.path_for(issue.id), format_issue(issue)};
    return {std::move(issue), std::move(w)};
}

std::pair<Issue, FileWrite> mark_resolved(const vcs::Tree& tree, const std::string& id, PrId by,
                                          const TrackerConfig& config) {
    const auto path = config.path_for(id);
    auto it = tree.find(path);
    if (it == tree.end()) throw Error(Errc::unknown_issue, "unknown issue '" + id + "'");
    auto issue = parse_issue(it->second);
    if (!issue.open()) throw Error(Errc::already_resolved, "issue '" + id + "' is already resolved");
    issue.status = IssueStatus::resolved;
    issue.resolved_by = by;
    FileWrite w{path, format_issue(issue)};
    return {std::move(issue), std::move(w)};
}

std::string summarize(const std::vector<const Issue*>& issues) {
    std::string out;
    for (const auto* i : issues) {
        out += i->id + " [" + std::string(status_name(i->status)) + "] " + std::string(kind_name(i->kind)) + " " +
               (i->subject.empty() ? "-" : i->subject) + ": " + i->title + "\n";
    }
    return out;
}

std::vector<std::string> triage(const checker::Analysis& main, const IssueSet& issues) {
    std::vector<std::string> stale;
    for (const auto& [id, issue] : issues.by_id) {
        if (!issue.open() || issue.subject.empty()) continue;
        if (issue.kind != IssueKind::proving_task && issue.kind != IssueKind::blocker) continue;
        if (main.proved(issue.subject)) stale.push_back(id);
    }
    return stale;
}

std::vector<std::string> coherence_violations(const IssueSet& issues, const std::set<PrId>& merged) {
    std::vector<std::string> bad;
    for (const auto& [id, issue] : issues.by_id) {
        if (issue.status == IssueStatus::resolved && (!issue.resolved_by || !merged.count(*issue.resolved_by))) {
            bad.push_back(id);
        }
    }
    return bad;
}

}  // namespace swarm::issues
