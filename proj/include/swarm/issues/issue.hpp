#pragma once

#include "swarm/checker/check.hpp"
#include "swarm/common/types.hpp"
#include "swarm/vcs/diff.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace swarm::issues {

enum class IssueStatus { open, resolved };
enum class IssueKind { proving_task, blocker, refactor, global, report };

std::string_view status_name(IssueStatus s);
std::string_view kind_name(IssueKind k);
std::optional<IssueStatus> parse_status(std::string_view s);
std::optional<IssueKind> parse_kind(std::string_view s);

struct Issue {
    std::string id;
    std::string title;
    IssueStatus status = IssueStatus::open;
    IssueKind kind = IssueKind::report;
    AgentId created_by;
    std::optional<PrId> resolved_by;
    std::string subject;  // declaration the issue is about, may be empty
    std::string body;

    bool open() const { return status == IssueStatus::open; }
    bool operator==(const Issue&) const = default;
};

/// On-disk form:
///
///   ---
///   id: 0b5e...-...
///   title: prove t1
///   status: open
///   kind: proving-task
///   created_by: agent-104
///   resolved_by:
///   subject: t1
///   ---
///   free text body
///
/// Header keys appear in exactly this order.
std::string format_issue(const Issue& issue);
/// Throws Error(parse_error).
Issue parse_issue(std::string_view text);

struct TrackerConfig {
    std::string dir = "issues/";

    std::string path_for(const std::string& id) const { return dir + id + ".md"; }
    bool owns(std::string_view path) const;
};

/// Version-4-shaped UUID derived from (seed, agent, counter).
std::string make_uuid(std::uint64_t seed, AgentId agent, std::uint64_t counter);

/// Per-agent UUID source. Deterministic for a given seed.
class IdSource {
public:
    explicit IdSource(std::uint64_t seed) : seed_(seed) {}
    std::string next(AgentId agent);
    std::map<std::uint64_t, std::uint64_t> counters() const { return counters_; }
    void restore(std::map<std::uint64_t, std::uint64_t> counters) { counters_ = std::move(counters); }

private:
    std::uint64_t seed_;
    std::map<std::uint64_t, std::uint64_t> counters_;
};

struct FileWrite {
    std::string path;
    std::string content;
};

struct IssueSet {
    std::map<std::string, Issue> by_id;
    std::vector<checker::Diagnostic> errors;  // files under the tracker dir that fail to parse

    std::vector<const Issue*> filter(std::optional<IssueStatus> status, std::optional<IssueKind> kind) const;
    /// Open issues whose subject is `subject`, optionally of one kind.
    std::vector<const Issue*> open_about(std::string_view subject, std::optional<IssueKind> kind = {}) const;
};

IssueSet load_issues(const vcs::Tree& tree, const TrackerConfig& config = {});

struct NewIssue {
    std::string title;
    std::string body;
    IssueKind kind = IssueKind::report;
    std::string subject;
};

/// Builds the file for a new issue. The id is fresh with respect to `tree`.
std::pair<Issue, FileWrite> create_issue(const vcs::Tree& tree, IdSource& ids, AgentId author, NewIssue spec,
                                         const TrackerConfig& config = {});

/// Throws Error(unknown_issue) or Error(already_resolved).
std::pair<Issue, FileWrite> mark_resolved(const vcs::Tree& tree, const std::string& id, PrId by,
                                          const TrackerConfig& config = {});

/// One line per issue: `<id> [<status>] <kind> <subject>: <title>`.
std::string summarize(const std::vector<const Issue*>& issues);

/// Open issues that are already resolved on `main`: proving tasks and blockers
/// whose subject is proved.
std::vector<std::string> triage(const checker::Analysis& main, const IssueSet& issues);

/// Resolved issues whose resolving PR is not in `merged`.
std::vector<std::string> coherence_violations(const IssueSet& issues, const std::set<PrId>& merged);

}  // namespace swarm::issues
